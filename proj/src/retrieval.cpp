#include "saattack/retrieval.hpp"

#include <algorithm>

namespace saattack {

void RetrievalGallery::add(std::string id, EmbeddingVector embedding) {
  if (!items_.empty() && embedding.dim() != items_.front().second.dim()) {
    throw ConfigError("gallery embedding dimension mismatch for '" + id + "'");
  }
  if (index_.contains(id)) throw ConfigError("duplicate gallery id '" + id + "'");
  index_.emplace(id, items_.size());
  items_.emplace_back(std::move(id), std::move(embedding));
}

std::vector<std::string> retrieve_topk(const EmbeddingVector& query, const RetrievalGallery& gallery,
                                       int k) {
  if (k < 1) throw ConfigError("retrieve_topk requires K >= 1");
  if (gallery.empty()) throw Error("retrieve_topk on an empty gallery");
  if (query.dim() != gallery.items().front().second.dim()) {
    throw ConfigError("query dimension does not match gallery");
  }
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(gallery.size());
  for (const auto& [id, e] : gallery.items()) scored.emplace_back(cosine_similarity(query, e), &id);
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return *a.second < *b.second;
                    });
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*scored[i].second);
  return out;
}

namespace {

bool hit(const std::vector<std::string>& top, const std::set<std::string>& correct) {
  return std::any_of(top.begin(), top.end(), [&](const auto& id) { return correct.contains(id); });
}

const std::set<std::string>& correct_for(const Pairing& pairing, const std::string& id) {
  auto it = pairing.find(id);
  if (it == pairing.end() || it->second.empty()) {
    throw Error("query '" + id + "' has no correct counterpart in the pairing");
  }
  return it->second;
}

}  // namespace

double asr_at_k(std::span<const RetrievalQuery> queries, const RetrievalGallery& gallery,
                const Pairing& pairing, int k) {
  if (queries.empty()) throw Error("asr_at_k needs at least one query");
  std::size_t misses = 0;
  for (const auto& q : queries) {
    if (!hit(retrieve_topk(q.embedding, gallery, k), correct_for(pairing, q.id))) ++misses;
  }
  return 100.0 * static_cast<double>(misses) / static_cast<double>(queries.size());
}

std::string_view to_string(AsrDenominator d) {
  return d == AsrDenominator::AllQueries ? "all" : "pre_attack_correct";
}

AsrDenominator parse_asr_denominator(std::string_view s) {
  if (s == "all") return AsrDenominator::AllQueries;
  if (s == "pre_attack_correct") return AsrDenominator::PreAttackCorrect;
  throw ConfigError("unknown ASR denominator '" + std::string(s) + "'");
}

double AttackReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  throw Error("report has no metric '" + name + "'");
}

std::string caption_id(const std::string& entry_id, std::size_t c) {
  return entry_id + "#" + std::to_string(c);
}

namespace {

// Queries kept under the pre-attack-correct convention.
std::vector<RetrievalQuery> filter_pre_attack(std::vector<RetrievalQuery> adv,
                                              const std::vector<RetrievalQuery>& benign,
                                              const RetrievalGallery& benign_gallery,
                                              const Pairing& pairing) {
  std::vector<RetrievalQuery> kept;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    if (hit(retrieve_topk(benign[i].embedding, benign_gallery, 1),
            correct_for(pairing, benign[i].id))) {
      kept.push_back(std::move(adv[i]));
    }
  }
  return kept;
}

}  // namespace

AttackReport transfer_evaluate(std::span<const AdversarialPair> pairs, const std::string& method,
                               const std::string& source_desc, const DualEncoder& target,
                               std::span<const EvalSample> dataset, const EvalOptions& opts) {
  if (pairs.size() != dataset.size()) {
    throw ConfigError("transfer_evaluate: " + std::to_string(pairs.size()) + " pairs for " +
                      std::to_string(dataset.size()) + " dataset entries");
  }
  if (dataset.empty()) throw Error("transfer_evaluate needs at least one sample");
  if (opts.ks.empty()) throw ConfigError("transfer_evaluate needs at least one K");
  for (int k : opts.ks) {
    if (k < 1) throw ConfigError("K values must be >= 1");
  }

  RetrievalGallery adv_texts, adv_images, benign_texts, benign_images;
  std::vector<RetrievalQuery> tr_queries, ir_queries, tr_benign, ir_benign;
  Pairing tr_pairing, ir_pairing;
  const bool need_benign = opts.denominator == AsrDenominator::PreAttackCorrect;

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset[i];
    const auto& p = pairs[i];
    if (s.captions.empty()) throw ConfigError("dataset entry '" + s.id + "' has no captions");
    auto x_emb = target.encode_image(p.x_adv);
    if (x_emb.dim() != target.embedding_dim()) {
      throw ConfigError("target encoder produced an embedding of unexpected dimension");
    }
    adv_images.add(s.id, x_emb);
    tr_queries.push_back({s.id, std::move(x_emb)});
    if (need_benign) {
      auto b = target.encode_image(s.image);
      benign_images.add(s.id, b);
      tr_benign.push_back({s.id, std::move(b)});
    }
    for (std::size_t c = 0; c < s.captions.size(); ++c) {
      const auto cid = caption_id(s.id, c);
      tr_pairing[s.id].insert(cid);
      adv_texts.add(cid, target.encode_text(c == 0 ? p.t_adv : s.captions[c]));
      if (need_benign) benign_texts.add(cid, target.encode_text(s.captions[c]));
    }
    const auto cid0 = caption_id(s.id, 0);
    ir_pairing[cid0].insert(s.id);
    ir_queries.push_back({cid0, target.encode_text(p.t_adv)});
    if (need_benign) ir_benign.push_back({cid0, target.encode_text(s.captions[0])});
  }

  if (need_benign) {
    tr_queries = filter_pre_attack(std::move(tr_queries), tr_benign, benign_texts, tr_pairing);
    ir_queries = filter_pre_attack(std::move(ir_queries), ir_benign, benign_images, ir_pairing);
  }

  AttackReport r;
  r.method = method;
  r.source = r.source_descriptor = source_desc;
  r.target = r.target_descriptor = target.describe();
  r.sample_count = dataset.size();
  r.denominator = opts.denominator;
  if (!pairs.empty()) r.config = pairs.front().provenance.config;

  auto rate = [](const std::vector<RetrievalQuery>& q, const RetrievalGallery& g,
                 const Pairing& pairing, int k) {
    return q.empty() ? 0.0 : asr_at_k(q, g, pairing, k);
  };
  for (int k : opts.ks) {
    r.metrics.emplace_back("TR_R@" + std::to_string(k), rate(tr_queries, adv_texts, tr_pairing, k));
  }
  for (int k : opts.ks) {
    r.metrics.emplace_back("IR_R@" + std::to_string(k), rate(ir_queries, adv_images, ir_pairing, k));
  }
  return r;
}

}  // namespace saattack
