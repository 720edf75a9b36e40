#include "saattack/text_attack.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace saattack {

std::vector<std::string> LexiconProposer::propose(const TextSample& t,
                                                  std::size_t position) const {
  return lex_.synonyms(t[position]);
}

std::vector<double> word_importance(const TextSample& t, const ImageTensor& x,
                                    const DualEncoder& enc) {
  const auto img = enc.encode_image(x);
  const double base = cosine_similarity(enc.encode_text(t), img);
  std::vector<double> imp(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    imp[i] = base - cosine_similarity(enc.encode_text(t.with_word(i, kMaskToken)), img);
  }
  return imp;
}

std::vector<std::size_t> word_importance_ranking(const TextSample& t, const ImageTensor& x,
                                                 const DualEncoder& enc, int k) {
  if (k < 1) throw ConfigError("top-k must be >= 1");
  const auto imp = word_importance(t, x, enc);
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
  order.resize(std::min(order.size(), static_cast<std::size_t>(k)));
  return order;
}

double loss_text(const EmbeddingVector& candidate, const EmbeddingVector& benign,
                 std::span<const EmbeddingVector> augmented) {
  double loss = -cosine_similarity(candidate, benign);
  for (const auto& a : augmented) loss -= cosine_similarity(candidate, a);
  return loss;
}

double loss_text(const TextSample& candidate, const ImageTensor& x_ben,
                 std::span<const ImageTensor> x_aug, const DualEncoder& enc) {
  std::vector<EmbeddingVector> aug;
  aug.reserve(x_aug.size());
  for (const auto& x : x_aug) aug.push_back(enc.encode_image(x));
  return loss_text(enc.encode_text(candidate), enc.encode_image(x_ben), aug);
}

namespace {

bool valid_replacement(const std::string& r, const std::string& original) {
  if (r.empty() || r == original) return false;
  return std::none_of(r.begin(), r.end(), [](unsigned char c) { return std::isspace(c); });
}

// Strict "better than" under the documented tie-breaking order.
bool better(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.position != b.position) return a.position < b.position;
  return a.replacement < b.replacement;
}

}  // namespace

TextAttackResult text_attack_detailed(const TextSample& t_in, const ImageTensor& x_ben,
                                      std::span<const ImageTensor> x_aug, const DualEncoder& enc,
                                      const AttackConfig& cfg,
                                      const SubstituteProposer& proposer) {
  cfg.validate();
  TextAttackResult res{t_in, word_importance_ranking(t_in, x_ben, enc, cfg.top_k), {}, -1};

  const auto benign = enc.encode_image(x_ben);
  std::vector<EmbeddingVector> aug;
  aug.reserve(x_aug.size());
  for (const auto& x : x_aug) aug.push_back(enc.encode_image(x));

  for (std::size_t pos : res.ranked_positions) {
    auto proposals = proposer.propose(t_in, pos);
    std::erase_if(proposals, [&](const std::string& r) { return !valid_replacement(r, t_in[pos]); });
    // Keep first occurrences so the per-position cap follows proposer order.
    std::vector<std::string> unique;
    for (auto& p : proposals) {
      if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(std::move(p));
    }
    if (cfg.candidates_per_position > 0 &&
        unique.size() > static_cast<std::size_t>(cfg.candidates_per_position)) {
      unique.resize(static_cast<std::size_t>(cfg.candidates_per_position));
    }
    for (auto& r : unique) {
      const auto cand = t_in.with_word(pos, r);
      const double score = loss_text(enc.encode_text(cand), benign, aug);
      res.evaluated.push_back({pos, std::move(r), score});
      const int idx = static_cast<int>(res.evaluated.size()) - 1;
      if (res.chosen < 0 || better(res.evaluated.back(), res.evaluated[res.chosen])) {
        res.chosen = idx;
      }
    }
  }
  if (res.chosen >= 0) {
    const auto& c = res.evaluated[static_cast<std::size_t>(res.chosen)];
    res.text = t_in.with_word(c.position, c.replacement);
  }
  return res;
}

TextSample text_attack(const TextSample& t_in, const ImageTensor& x_ben,
                       std::span<const ImageTensor> x_aug, const DualEncoder& enc,
                       const AttackConfig& cfg, const SubstituteProposer& proposer) {
  return text_attack_detailed(t_in, x_ben, x_aug, enc, cfg, proposer).text;
}

}  // namespace saattack
