#include "saattack/pipeline.hpp"

#include "saattack/image_attack.hpp"

namespace saattack {

std::string_view to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::SaAttack: return "sa";
    case AttackMethod::PgdOnly: return "pgd_only";
    case AttackMethod::TextOnly: return "text_only";
    case AttackMethod::Sep: return "sep";
  }
  return "?";
}

AttackMethod parse_attack_method(std::string_view name) {
  if (name == "sa") return AttackMethod::SaAttack;
  if (name == "pgd_only") return AttackMethod::PgdOnly;
  if (name == "text_only") return AttackMethod::TextOnly;
  if (name == "sep") return AttackMethod::Sep;
  throw ConfigError("unknown attack method '" + std::string(name) +
                    "' (expected sa, pgd_only, text_only or sep)");
}

namespace {

struct ProposerRef {
  std::optional<LexiconProposer> owned;
  const SubstituteProposer* ptr;

  ProposerRef(const PipelineOptions& opts, const Lexicon& lex) {
    if (opts.proposer) {
      ptr = opts.proposer;
    } else {
      owned.emplace(lex);
      ptr = &*owned;
    }
  }
};

Provenance make_provenance(AttackMethod m, const RandomStream& rng, const AttackConfig& cfg,
                           const DualEncoder& enc) {
  return {std::string(to_string(m)), rng.seed(), cfg, enc.describe()};
}

ImageTensor pgd_only_image(const ImageTensor& x_ben, const TextSample& t_ben,
                           const DualEncoder& enc, const AttackConfig& cfg, RandomStream& rng) {
  AttackConfig plain = cfg;
  plain.scale_factors = {1.0};
  return image_attack(x_ben, t_ben, {}, enc, plain, rng);
}

}  // namespace

AdversarialPair sa_attack(const ImageTensor& x_ben, const TextSample& t_ben,
                          const DualEncoder& enc, const AttackConfig& cfg, const Lexicon& lex,
                          RandomStream& rng, const PipelineOptions& opts, SaAttackTrace* trace) {
  cfg.validate();
  const ProposerRef proposer(opts, lex);
  const auto provenance = make_provenance(AttackMethod::SaAttack, rng, cfg, enc);

  TextSample t_inter = text_attack(t_ben, x_ben, {}, enc, cfg, *proposer.ptr);

  std::vector<TextSample> t_cat = eda_augment(t_ben, cfg.text_augmentations, lex, rng);
  for (auto& t : eda_augment(t_inter, cfg.text_augmentations, lex, rng)) t_cat.push_back(std::move(t));
  ImageTensor x_adv = image_attack(x_ben, t_ben, t_cat, enc, cfg, rng);

  std::vector<ImageTensor> x_cat =
      sia_augment(x_ben, cfg.image_augmentations, opts.grid, rng, opts.ranges);
  for (auto& x : sia_augment(x_adv, cfg.image_augmentations, opts.grid, rng, opts.ranges)) {
    x_cat.push_back(std::move(x));
  }
  TextSample t_adv = text_attack(t_inter, x_ben, x_cat, enc, cfg, *proposer.ptr);

  if (trace) {
    trace->t_cat = std::move(t_cat);
    trace->x_cat = std::move(x_cat);
  }
  return {std::move(x_adv), std::move(t_adv), std::move(t_inter), provenance};
}

AdversarialPair baseline_attack(AttackMethod kind, const ImageTensor& x_ben,
                                const TextSample& t_ben, const DualEncoder& enc,
                                const AttackConfig& cfg, const Lexicon& lex, RandomStream& rng,
                                const PipelineOptions& opts) {
  cfg.validate();
  const ProposerRef proposer(opts, lex);
  const auto provenance = make_provenance(kind, rng, cfg, enc);
  switch (kind) {
    case AttackMethod::PgdOnly:
      return {pgd_only_image(x_ben, t_ben, enc, cfg, rng), t_ben, t_ben, provenance};
    case AttackMethod::TextOnly:
      return {x_ben, text_attack(t_ben, x_ben, {}, enc, cfg, *proposer.ptr), t_ben, provenance};
    case AttackMethod::Sep: {
      auto x_adv = pgd_only_image(x_ben, t_ben, enc, cfg, rng);
      auto t_adv = text_attack(t_ben, x_ben, {}, enc, cfg, *proposer.ptr);
      return {std::move(x_adv), std::move(t_adv), t_ben, provenance};
    }
    case AttackMethod::SaAttack:
      break;
  }
  throw ConfigError("baseline_attack does not run the full pipeline; use sa_attack");
}

AdversarialPair run_attack(AttackMethod method, const ImageTensor& x_ben, const TextSample& t_ben,
                           const DualEncoder& enc, const AttackConfig& cfg, const Lexicon& lex,
                           RandomStream& rng, const PipelineOptions& opts) {
  if (method == AttackMethod::SaAttack) return sa_attack(x_ben, t_ben, enc, cfg, lex, rng, opts);
  return baseline_attack(method, x_ben, t_ben, enc, cfg, lex, rng, opts);
}

}  // namespace saattack
