#include "saattack/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "saattack/io.hpp"

namespace saattack {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  attack.validate();
  if (methods.empty()) throw ConfigError("experiment config: method list is empty");
  if (cells.empty()) throw ConfigError("experiment config: no (source, target) cells");
  if (encoders.empty()) throw ConfigError("experiment config: no encoders");
  std::set<std::string> names;
  for (const auto& e : encoders) {
    if (e.name.empty() || e.name.find_first_of("/\\ _") != std::string::npos) {
      throw ConfigError("encoder name '" + e.name + "' must be non-empty without '/', '_' or spaces");
    }
    if (!names.insert(e.name).second) throw ConfigError("duplicate encoder name '" + e.name + "'");
    e.spec.validate();
  }
  for (const auto& c : cells) {
    if (!names.contains(c.source)) throw ConfigError("cell references unknown encoder '" + c.source + "'");
    if (!names.contains(c.target)) throw ConfigError("cell references unknown encoder '" + c.target + "'");
  }
  if (dataset.empty()) throw ConfigError("experiment config: dataset manifest path missing");
  if (vocabulary.empty()) throw ConfigError("experiment config: vocabulary path missing");
  if (out.empty()) throw ConfigError("experiment config: output directory missing");
  if (eval.ks.empty()) throw ConfigError("experiment config: ks is empty");
  for (int k : eval.ks) {
    if (k < 1) throw ConfigError("experiment config: K values must be >= 1");
  }
  if (grid.rows < 1 || grid.cols < 1) throw ConfigError("experiment config: grid must be >= 1x1");
  if (workers < 0) throw ConfigError("experiment config: workers must be >= 0");
}

const NamedEncoder& ExperimentConfig::encoder(const std::string& name) const {
  for (const auto& e : encoders) {
    if (e.name == name) return e;
  }
  throw ConfigError("unknown encoder '" + name + "'");
}

ExperimentConfig experiment_config_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> known = {"attack",  "methods", "encoders", "cells",
                                              "dataset", "vocabulary", "lexicon", "out",
                                              "ks",      "asr_denominator", "grid", "workers"};
  for (const auto& [k, _] : j.items()) {
    if (!known.contains(k)) throw ConfigError("unknown key '" + k + "' in experiment config");
  }
  auto path = [&](const char* key) -> fs::path {
    if (!j.contains(key)) return {};
    if (!j[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    fs::path p = j[key].get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };

  ExperimentConfig c;
  try {
    if (j.contains("attack")) c.attack = attack_config_from_json(j["attack"]);
    const Json methods = j.value("methods", Json::array());
    const Json encoders = j.value("encoders", Json::object());
    const Json cells = j.value("cells", Json::array());
    for (const auto& m : methods) {
      c.methods.push_back(parse_attack_method(m.get<std::string>()));
    }
    for (const auto& [name, spec] : encoders.items()) {
      c.encoders.push_back({name, toy_spec_from_json(spec)});
    }
    for (const auto& cell : cells) {
      c.cells.push_back({cell.at("source").get<std::string>(), cell.at("target").get<std::string>()});
    }
    if (j.contains("ks")) c.eval.ks = j["ks"].get<std::vector<int>>();
    if (j.contains("asr_denominator")) {
      c.eval.denominator = parse_asr_denominator(j["asr_denominator"].get<std::string>());
    }
    if (j.contains("grid")) {
      const auto g = j["grid"].get<std::vector<int>>();
      if (g.size() != 2) throw ConfigError("grid must be [rows, cols]");
      c.grid = {g[0], g[1]};
    }
    c.workers = j.value("workers", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.dataset = path("dataset");
  c.vocabulary = path("vocabulary");
  c.lexicon = path("lexicon");
  c.out = path("out");
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["attack"] = to_json(c.attack);
  j["methods"] = Json::array();
  for (auto m : c.methods) j["methods"].push_back(std::string(to_string(m)));
  j["encoders"] = Json::object();
  for (const auto& e : c.encoders) j["encoders"][e.name] = to_json(e.spec);
  j["cells"] = Json::array();
  for (const auto& cell : c.cells) j["cells"].push_back({{"source", cell.source}, {"target", cell.target}});
  j["dataset"] = c.dataset.generic_string();
  j["vocabulary"] = c.vocabulary.generic_string();
  if (!c.lexicon.empty()) j["lexicon"] = c.lexicon.generic_string();
  j["out"] = c.out.generic_string();
  j["ks"] = c.eval.ks;
  j["asr_denominator"] = std::string(to_string(c.eval.denominator));
  j["grid"] = {c.grid.rows, c.grid.cols};
  j["workers"] = c.workers;
  return j;
}

std::uint64_t entry_seed(std::uint64_t run_seed, const std::string& entry_id) {
  return derive_seed(run_seed, stable_hash(entry_id));
}

namespace {

template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  std::size_t w = workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                               : static_cast<std::size_t>(workers);
  w = std::min(w, n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < w; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<AdversarialPair> craft_pairs(AttackMethod method, std::span<const EvalSample> dataset,
                                         const DualEncoder& source, const AttackConfig& cfg,
                                         const Lexicon& lex, const PipelineOptions& opts,
                                         int workers) {
  std::vector<std::optional<AdversarialPair>> slots(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    const auto& s = dataset[i];
    RandomStream rng(entry_seed(cfg.seed, s.id));
    try {
      slots[i] = run_attack(method, s.image, s.captions.front(), source, cfg, lex, rng, opts);
    } catch (const Error& e) {
      throw Error("entry '" + s.id + "': " + e.what());
    }
  });
  std::vector<AdversarialPair> out;
  out.reserve(slots.size());
  for (auto& p : slots) out.push_back(std::move(*p));
  return out;
}

std::string report_file_name(const AttackReport& r) {
  return r.method + "__" + r.source + "__" + r.target + ".json";
}

namespace {

void write_text(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
  if (!out) throw Error("failed writing " + p.string());
}

void persist_pairs(const fs::path& dir, std::span<const EvalSample> dataset,
                   std::span<const AdversarialPair> pairs) {
  fs::create_directories(dir);
  std::ostringstream texts, prov;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& id = dataset[i].id;
    const auto& p = pairs[i];
    write_png(dir / (id + ".png"), p.x_adv);
    texts << id << '\t' << p.t_adv.join() << '\n';
    Json j;
    j["id"] = id;
    j["method"] = p.provenance.method;
    j["seed"] = p.provenance.seed;
    j["source"] = p.provenance.source;
    j["t_ben"] = dataset[i].captions.front().join();
    j["t_inter"] = p.t_inter.join();
    j["t_adv"] = p.t_adv.join();
    prov << j.dump() << '\n';
  }
  write_text(dir / "texts.tsv", texts.str());
  write_text(dir / "provenance.jsonl", prov.str());
}

}  // namespace

std::vector<AttackReport> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out);
  std::ofstream log(cfg.out / "run.log");
  log << "config " << to_json(cfg).dump() << '\n';

  try {
    const auto dataset = ingest_dataset(cfg.dataset);
    const auto vocab = load_vocabulary(cfg.vocabulary);
    const Lexicon lex = cfg.lexicon.empty() ? Lexicon::parse(bundled_lexicon_text())
                                            : Lexicon::load(cfg.lexicon);
    std::map<std::string, std::unique_ptr<ToyDualEncoder>> encoders;
    for (const auto& e : cfg.encoders) {
      encoders.emplace(e.name, std::make_unique<ToyDualEncoder>(e.spec, vocab));
    }
    PipelineOptions opts;
    opts.grid = cfg.grid;

    std::vector<AttackReport> reports;
    for (auto method : cfg.methods) {
      const std::string mname(to_string(method));
      std::vector<std::string> sources;
      for (const auto& c : cfg.cells) {
        if (std::find(sources.begin(), sources.end(), c.source) == sources.end()) {
          sources.push_back(c.source);
        }
      }
      for (const auto& src : sources) {
        const auto& source = *encoders.at(src);
        const auto pairs = craft_pairs(method, dataset, source, cfg.attack, lex, opts, cfg.workers);
        persist_pairs(cfg.out / "adversarial" / mname / src, dataset, pairs);
        log << "crafted method=" << mname << " source=" << src << " entries=" << pairs.size() << '\n';
        for (const auto& c : cfg.cells) {
          if (c.source != src) continue;
          auto r = transfer_evaluate(pairs, mname, source.describe(), *encoders.at(c.target), dataset,
                                     cfg.eval);
          r.source = c.source;
          r.target = c.target;
          write_text(cfg.out / "reports" / report_file_name(r), to_json(r).dump(2) + "\n");
          log << "report " << report_file_name(r) << '\n';
          reports.push_back(std::move(r));
        }
      }
    }
    write_text(cfg.out / "summary.csv", summary_csv(reports));
    log << "done reports=" << reports.size() << '\n';
    return reports;
  } catch (const std::exception& e) {
    log << "FAILED: " << e.what() << "\npartial outputs may be present under " << cfg.out.string()
        << '\n';
    throw;
  }
}

std::vector<AttackReport> load_reports(const fs::path& dir) {
  fs::path d = fs::is_directory(dir / "reports") ? dir / "reports" : dir;
  if (!fs::is_directory(d)) throw ConfigError("report directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(d)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<AttackReport> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    try {
      out.push_back(attack_report_from_json(Json::parse(in)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot parse report " + f.string() + ": " + e.what());
    }
  }
  return out;
}

std::string summary_csv(const std::vector<AttackReport>& reports) {
  std::ostringstream os;
  os << "method,source,target,metric,value\n";
  for (const auto& r : reports) {
    for (const auto& [name, v] : r.metrics) {
      os << r.method << ',' << r.source << ',' << r.target << ',' << name << ','
         << format_metric(v) << '\n';
    }
  }
  return os.str();
}

std::string summary_table(const std::vector<AttackReport>& reports) {
  std::vector<std::string> columns;
  for (const auto& r : reports) {
    for (const auto& [name, _] : r.metrics) {
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
    }
  }
  std::ostringstream os;
  os << std::left << std::setw(10) << "method" << std::setw(8) << "source" << std::setw(8)
     << "target";
  for (const auto& c : columns) os << std::right << std::setw(10) << c;
  os << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(10) << r.method << std::setw(8) << r.source << std::setw(8)
       << r.target;
    for (const auto& c : columns) {
      os << std::right << std::setw(10);
      auto it = std::find_if(r.metrics.begin(), r.metrics.end(),
                             [&](const auto& m) { return m.first == c; });
      if (it == r.metrics.end()) {
        os << "-";
      } else {
        std::ostringstream v;
        v << std::fixed << std::setprecision(2) << it->second;
        os << v.str();
      }
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<std::string> lexicon_vocabulary(const Lexicon& lex) {
  std::set<std::string> words;
  for (const auto& [head, syns] : lex.entries()) {
    words.insert(head);
    words.insert(syns.begin(), syns.end());
  }
  return {words.begin(), words.end()};
}

ToyDataset make_toy_dataset(const ToyDatasetSpec& spec, const Lexicon& lex) {
  if (spec.entries < 1) throw ConfigError("toy dataset needs at least one entry");
  if (spec.caption_length < 1) throw ConfigError("toy caption length must be >= 1");
  std::vector<std::string> heads;
  for (const auto& [h, _] : lex.entries()) heads.push_back(h);
  if (heads.size() < static_cast<std::size_t>(spec.caption_length)) {
    throw ConfigError("lexicon has fewer headwords than the caption length");
  }
  ToyDataset ds;
  ds.vocabulary = lexicon_vocabulary(lex);
  RandomStream rng(spec.seed);
  const int width = std::max(3, static_cast<int>(std::to_string(spec.entries - 1).size()));
  for (int i = 0; i < spec.entries; ++i) {
    // Partial Fisher-Yates: distinct words per caption.
    auto pool = heads;
    std::vector<std::string> words;
    for (int w = 0; w < spec.caption_length; ++w) {
      const std::size_t j = w + rng.uniform_index(pool.size() - w);
      std::swap(pool[w], pool[j]);
      words.push_back(pool[w]);
    }
    TextSample caption(std::move(words));
    std::ostringstream id;
    id << "toy" << std::setw(width) << std::setfill('0') << i;
    auto img = quantize(render_toy_image(spec.world, caption, spec.noise, rng));
    ds.samples.push_back({id.str(), std::move(img), {std::move(caption)}});
  }
  return ds;
}

void write_toy_dataset(const fs::path& dir, const ToyDatasetSpec& spec,
                       const std::string& lexicon_text) {
  const auto lex = Lexicon::parse(lexicon_text);
  const auto ds = make_toy_dataset(spec, lex);
  fs::create_directories(dir / "images");
  std::vector<ManifestEntry> manifest;
  for (const auto& s : ds.samples) {
    const fs::path rel = fs::path("images") / (s.id + ".png");
    write_png(dir / rel, s.image);
    std::vector<std::string> caps;
    for (const auto& c : s.captions) caps.push_back(c.join());
    manifest.push_back({s.id, rel, caps});
  }
  write_manifest(dir / "manifest.jsonl", manifest);

  std::string vocab;
  for (const auto& w : ds.vocabulary) vocab += w + "\n";
  write_text(dir / "vocabulary.txt", vocab);
  write_text(dir / "lexicon.txt", lexicon_text);

  ExperimentConfig cfg;
  cfg.attack.seed = spec.seed;
  cfg.methods = {AttackMethod::SaAttack, AttackMethod::Sep, AttackMethod::PgdOnly,
                 AttackMethod::TextOnly};
  ToyEncoderSpec a = spec.world, b = spec.world;
  a.seed = derive_seed(spec.seed, 1) % 1000000;
  b.seed = derive_seed(spec.seed, 2) % 1000000;
  cfg.encoders = {{"A", a}, {"B", b}};
  cfg.cells = {{"A", "A"}, {"A", "B"}};
  cfg.dataset = "manifest.jsonl";
  cfg.vocabulary = "vocabulary.txt";
  cfg.lexicon = "lexicon.txt";
  cfg.out = "results";
  write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
}

}  // namespace saattack
