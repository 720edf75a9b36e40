#pragma once

// Experiment runner behind the command-line tool: config loading, batch
// crafting over a dataset, transfer reports, summary tables, and a toy
// dataset generator for desk-scale runs.

#include <filesystem>
#include <string>
#include <vector>

#include "saattack/core.hpp"
#include "saattack/encoders.hpp"
#include "saattack/image_augment.hpp"
#include "saattack/pipeline.hpp"
#include "saattack/retrieval.hpp"
#include "saattack/serialization.hpp"
#include "saattack/text_augment.hpp"

namespace saattack {

struct NamedEncoder {
  std::string name;
  ToyEncoderSpec spec;
};

struct EvalCell {
  std::string source;
  std::string target;
};

struct ExperimentConfig {
  AttackConfig attack;
  std::vector<AttackMethod> methods;
  std::vector<NamedEncoder> encoders;
  std::vector<EvalCell> cells;
  std::filesystem::path dataset;     // manifest (JSON lines)
  std::filesystem::path vocabulary;  // toy encoder vocabulary
  std::filesystem::path lexicon;
  std::filesystem::path out;
  EvalOptions eval;
  BlockGrid grid;
  int workers = 1;  // 0 = one per hardware thread

  /// Throws ConfigError; run before any work is done.
  void validate() const;
  const NamedEncoder& encoder(const std::string& name) const;
};

/// Relative paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const Json& j,
                                             const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
Json to_json(const ExperimentConfig& cfg);

/// Per-entry stream seed: depends on the run seed and the entry id only.
std::uint64_t entry_seed(std::uint64_t run_seed, const std::string& entry_id);

/// Crafts one pair per dataset entry (first caption), `workers` at a time.
std::vector<AdversarialPair> craft_pairs(AttackMethod method, std::span<const EvalSample> dataset,
                                         const DualEncoder& source, const AttackConfig& cfg,
                                         const Lexicon& lex, const PipelineOptions& opts,
                                         int workers);

/// For each method x cell: crafts (once per method x source), evaluates on
/// the target, and writes under cfg.out:
///   adversarial/<method>/<source>/<id>.png, texts.tsv, provenance.jsonl
///   reports/<method>__<source>__<target>.json
///   summary.csv, run.log
std::vector<AttackReport> run_experiment(const ExperimentConfig& cfg);

std::string report_file_name(const AttackReport& r);
/// Every *.json under dir/reports (or dir itself), sorted by file name.
std::vector<AttackReport> load_reports(const std::filesystem::path& dir);
/// Header "method,source,target,metric,value"; values as in the report JSON.
std::string summary_csv(const std::vector<AttackReport>& reports);
/// Human-readable table: one row per report, one column per metric.
std::string summary_table(const std::vector<AttackReport>& reports);

// ---------------------------------------------------------------------------
// Toy dataset

/// Bundled synonym lexicon (data/lexicon.txt).
const std::string& bundled_lexicon_text();

/// Headwords and synonyms, sorted and de-duplicated.
std::vector<std::string> lexicon_vocabulary(const Lexicon& lex);

struct ToyDatasetSpec {
  int entries = 64;
  int caption_length = 5;
  double noise = 0.02;
  std::uint64_t seed = 0;
  ToyEncoderSpec world{};  // image shape, patch size and concept seed are used
};

struct ToyDataset {
  std::vector<std::string> vocabulary;
  std::vector<EvalSample> samples;
};

/// Captions are distinct lexicon headwords; images are rendered from them.
ToyDataset make_toy_dataset(const ToyDatasetSpec& spec, const Lexicon& lex);

/// Writes images/, manifest.jsonl, vocabulary.txt, lexicon.txt and a
/// ready-to-run config.json (two encoders A and B, all four methods,
/// white-box and transfer cells).
void write_toy_dataset(const std::filesystem::path& dir, const ToyDatasetSpec& spec,
                       const std::string& lexicon_text);

}  // namespace saattack
