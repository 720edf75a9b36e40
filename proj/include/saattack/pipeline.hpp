#pragma once

// Three-step self-augmented attack and the baseline compositions it is
// compared against.
//
//   1. t_inter = text attack on t_ben against x_ben (no image augmentation)
//   2. x_adv   = image attack against t_ben and EDA(t_ben) ++ EDA(t_inter)
//   3. t_adv   = text attack on t_inter against x_ben and SIA(x_ben) ++ SIA(x_adv)

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saattack/core.hpp"
#include "saattack/encoders.hpp"
#include "saattack/image_augment.hpp"
#include "saattack/text_attack.hpp"
#include "saattack/text_augment.hpp"

namespace saattack {

enum class AttackMethod { SaAttack, PgdOnly, TextOnly, Sep };

std::string_view to_string(AttackMethod m);
/// Accepts "sa", "pgd_only", "text_only", "sep".
AttackMethod parse_attack_method(std::string_view name);

struct Provenance {
  std::string method;
  std::uint64_t seed = 0;  // seed of the stream the pair was crafted with
  AttackConfig config;
  std::string source;      // describe() of the source encoder
};

struct AdversarialPair {
  ImageTensor x_adv;
  TextSample t_adv;
  TextSample t_inter;
  Provenance provenance;
};

struct PipelineOptions {
  BlockGrid grid{};
  BlockTransformRanges ranges{};
  /// Overrides the lexicon-backed proposer when set. Not owned.
  const SubstituteProposer* proposer = nullptr;
};

/// Intermediate sets, for inspection.
struct SaAttackTrace {
  std::vector<TextSample> t_cat;   // 2 * A_t texts fed to the image attack
  std::vector<ImageTensor> x_cat;  // 2 * A_x images fed to the final text attack
};

AdversarialPair sa_attack(const ImageTensor& x_ben, const TextSample& t_ben,
                          const DualEncoder& enc, const AttackConfig& cfg, const Lexicon& lex,
                          RandomStream& rng, const PipelineOptions& opts = {},
                          SaAttackTrace* trace = nullptr);

/// pgd_only: plain PGD against t_ben at scale 1 only; t_adv = t_inter = t_ben.
/// text_only: text attack against x_ben; x_adv = x_ben, t_inter = t_ben.
/// sep: pgd_only and text_only run independently and combined.
AdversarialPair baseline_attack(AttackMethod kind, const ImageTensor& x_ben,
                                const TextSample& t_ben, const DualEncoder& enc,
                                const AttackConfig& cfg, const Lexicon& lex, RandomStream& rng,
                                const PipelineOptions& opts = {});

/// Dispatches on the method.
AdversarialPair run_attack(AttackMethod method, const ImageTensor& x_ben, const TextSample& t_ben,
                           const DualEncoder& enc, const AttackConfig& cfg, const Lexicon& lex,
                           RandomStream& rng, const PipelineOptions& opts = {});

}  // namespace saattack
