#pragma once

// Single-word substitution attack on a caption: rank words by how much
// masking them lowers image-text similarity, try substitutes for the top-k,
// keep the substitution that pushes the caption furthest from the image
// (and optionally from a set of augmented images).

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "saattack/core.hpp"
#include "saattack/encoders.hpp"
#include "saattack/text_augment.hpp"

namespace saattack {

/// Source of candidate replacements for one word position. Implementations
/// must be deterministic. A masked-language-model proposer plugs in here.
class SubstituteProposer {
 public:
  virtual ~SubstituteProposer() = default;
  virtual std::vector<std::string> propose(const TextSample& t, std::size_t position) const = 0;
};

/// Proposes the lexicon synonyms of the word at the position.
class LexiconProposer : public SubstituteProposer {
 public:
  explicit LexiconProposer(Lexicon lex) : lex_(std::move(lex)) {}
  std::vector<std::string> propose(const TextSample& t, std::size_t position) const override;

 private:
  Lexicon lex_;
};

struct ScoredCandidate {
  std::size_t position = 0;
  std::string replacement;
  double score = 0.0;  // loss_text of the substituted text
};

/// importance[i] = cos(f(t), f(x)) - cos(f(t with word i masked), f(x)).
std::vector<double> word_importance(const TextSample& t, const ImageTensor& x,
                                    const DualEncoder& enc);

/// Up to min(k, |t|) positions by descending importance; equal importance
/// keeps the lower position first.
std::vector<std::size_t> word_importance_ranking(const TextSample& t, const ImageTensor& x,
                                                 const DualEncoder& enc, int k);

/// -cos(f(t'), f(x_ben)) - sum_j cos(f(t'), f(x_aug[j])). With an empty
/// augmentation set this is the plain benign-image loss.
double loss_text(const TextSample& candidate, const ImageTensor& x_ben,
                 std::span<const ImageTensor> x_aug, const DualEncoder& enc);

/// Same loss from precomputed embeddings.
double loss_text(const EmbeddingVector& candidate, const EmbeddingVector& benign,
                 std::span<const EmbeddingVector> augmented);

struct TextAttackResult {
  TextSample text;
  std::vector<std::size_t> ranked_positions;
  std::vector<ScoredCandidate> evaluated;  // every scored substitution
  /// Index into `evaluated` of the applied substitution; -1 when unchanged.
  int chosen = -1;
};

/// Evaluates every proposal at the top-k positions and applies the one with
/// the highest loss. Ties go to the lower position, then the lexicographically
/// smaller replacement. Returns t_in unchanged if nothing was proposed.
///
/// cfg.candidates_per_position > 0 restricts scoring to that many proposals
/// per position (1 gives the strict one-replacement-per-word reading).
TextAttackResult text_attack_detailed(const TextSample& t_in, const ImageTensor& x_ben,
                                      std::span<const ImageTensor> x_aug, const DualEncoder& enc,
                                      const AttackConfig& cfg, const SubstituteProposer& proposer);

TextSample text_attack(const TextSample& t_in, const ImageTensor& x_ben,
                       std::span<const ImageTensor> x_aug, const DualEncoder& enc,
                       const AttackConfig& cfg, const SubstituteProposer& proposer);

}  // namespace saattack
