#pragma once

// JSON forms of configs and reports. Key order is fixed so that identical
// runs produce byte-identical documents.

#include <nlohmann/json.hpp>

#include "saattack/core.hpp"
#include "saattack/encoders.hpp"
#include "saattack/retrieval.hpp"

namespace saattack {

using Json = nlohmann::ordered_json;

/// Keys: eps_x, eps_t, alpha, T, k, A_x, A_t, scale_factors, seed,
/// init_amplitude, candidates_per_position.
Json to_json(const AttackConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
AttackConfig attack_config_from_json(const Json& j);

/// Keys: seed, patch_size, embedding_dim, image_shape [h, w, c], concept_seed.
Json to_json(const ToyEncoderSpec& spec);
ToyEncoderSpec toy_spec_from_json(const Json& j);

Json to_json(const AttackReport& r);
AttackReport attack_report_from_json(const Json& j);

/// Text form used for report values everywhere (JSON and CSV).
std::string format_metric(double v);

}  // namespace saattack
