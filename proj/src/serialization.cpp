#include "saattack/serialization.hpp"

#include <set>

namespace saattack {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!known.contains(k)) throw ConfigError("unknown key '" + k + "' in " + what);
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + what);
  }
}

}  // namespace

Json to_json(const AttackConfig& c) {
  Json j;
  j["eps_x"] = c.eps_x;
  j["eps_t"] = c.eps_t;
  j["alpha"] = c.alpha;
  j["T"] = c.iterations;
  j["k"] = c.top_k;
  j["A_x"] = c.image_augmentations;
  j["A_t"] = c.text_augmentations;
  j["scale_factors"] = c.scale_factors;
  j["seed"] = c.seed;
  j["init_amplitude"] = c.init_amplitude;
  j["candidates_per_position"] = c.candidates_per_position;
  return j;
}

AttackConfig attack_config_from_json(const Json& j) {
  const std::string what = "attack config";
  reject_unknown(j,
                 {"eps_x", "eps_t", "alpha", "T", "k", "A_x", "A_t", "scale_factors", "seed",
                  "init_amplitude", "candidates_per_position"},
                 what);
  AttackConfig c;
  read(j, "eps_x", c.eps_x, what);
  read(j, "eps_t", c.eps_t, what);
  read(j, "alpha", c.alpha, what);
  read(j, "T", c.iterations, what);
  read(j, "k", c.top_k, what);
  read(j, "A_x", c.image_augmentations, what);
  read(j, "A_t", c.text_augmentations, what);
  read(j, "scale_factors", c.scale_factors, what);
  read(j, "seed", c.seed, what);
  read(j, "init_amplitude", c.init_amplitude, what);
  read(j, "candidates_per_position", c.candidates_per_position, what);
  c.validate();
  return c;
}

Json to_json(const ToyEncoderSpec& s) {
  Json j;
  j["seed"] = s.seed;
  j["patch_size"] = s.patch_size;
  j["embedding_dim"] = s.embedding_dim;
  j["image_shape"] = {s.image_shape.height, s.image_shape.width, s.image_shape.channels};
  j["concept_seed"] = s.concept_seed;
  return j;
}

ToyEncoderSpec toy_spec_from_json(const Json& j) {
  const std::string what = "toy encoder spec";
  reject_unknown(j, {"type", "seed", "patch_size", "embedding_dim", "image_shape", "concept_seed"},
                 what);
  if (j.contains("type") && j["type"] != "toy") {
    throw ConfigError("only toy encoders are built in (got type " + j["type"].dump() + ")");
  }
  ToyEncoderSpec s;
  read(j, "seed", s.seed, what);
  read(j, "patch_size", s.patch_size, what);
  read(j, "embedding_dim", s.embedding_dim, what);
  read(j, "concept_seed", s.concept_seed, what);
  if (j.contains("image_shape")) {
    std::vector<int> shape;
    read(j, "image_shape", shape, what);
    if (shape.size() != 3) throw ConfigError("image_shape must be [height, width, channels]");
    s.image_shape = {shape[0], shape[1], shape[2]};
  }
  s.validate();
  return s;
}

Json to_json(const AttackReport& r) {
  Json j;
  j["method"] = r.method;
  j["source"] = r.source;
  j["target"] = r.target;
  j["source_descriptor"] = r.source_descriptor;
  j["target_descriptor"] = r.target_descriptor;
  j["sample_count"] = r.sample_count;
  j["asr_denominator"] = std::string(to_string(r.denominator));
  Json m = Json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  j["metrics"] = std::move(m);
  j["config"] = to_json(r.config);
  return j;
}

AttackReport attack_report_from_json(const Json& j) {
  try {
    AttackReport r;
    r.method = j.at("method").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.target = j.at("target").get<std::string>();
    r.source_descriptor = j.at("source_descriptor").get<std::string>();
    r.target_descriptor = j.at("target_descriptor").get<std::string>();
    r.sample_count = j.at("sample_count").get<std::size_t>();
    r.denominator = parse_asr_denominator(j.at("asr_denominator").get<std::string>());
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics.emplace_back(k, v.get<double>());
    r.config = attack_config_from_json(j.at("config"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed attack report: ") + e.what());
  }
}

std::string format_metric(double v) { return Json(v).dump(); }

}  // namespace saattack
