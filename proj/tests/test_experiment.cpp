#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "saattack/experiment.hpp"
#include "saattack/io.hpp"
#include "test_support.hpp"

using namespace saattack;
using namespace saattack::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_run(const fs::path& dir, int entries) {
  ToyDatasetSpec spec;
  spec.entries = entries;
  spec.seed = 5;
  write_toy_dataset(dir, spec, bundled_lexicon_text());
  return load_experiment_config(dir / "config.json");
}

}  // namespace

TEST(ExperimentConfig, LoadsToyConfigWithResolvedPaths) {
  const auto dir = scratch_dir("exp_cfg");
  const auto cfg = small_run(dir, 4);
  EXPECT_EQ(cfg.dataset, dir / "manifest.jsonl");
  EXPECT_EQ(cfg.out, dir / "results");
  EXPECT_EQ(cfg.methods.size(), 4u);
  EXPECT_EQ(cfg.encoders.size(), 2u);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(experiment_config_from_json(to_json(cfg), "/elsewhere").dataset, cfg.dataset);
}

TEST(ExperimentConfig, ValidationErrors) {
  const auto dir = scratch_dir("exp_invalid");
  const auto good = small_run(dir, 2);
  auto cfg = good;
  cfg.methods.clear();
  cfg.out = dir / "never";
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "never"));
  cfg = good;
  cfg.cells = {{"A", "Z"}};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = good;
  cfg.cells.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = good;
  cfg.encoders.push_back(cfg.encoders.front());
  EXPECT_THROW(cfg.validate(), ConfigError);
  auto j = to_json(good);
  j["bogus"] = 1;
  EXPECT_THROW(experiment_config_from_json(j, dir), ConfigError);
  j = to_json(good);
  j["methods"] = {"sa", "co_attack"};
  EXPECT_THROW(experiment_config_from_json(j, dir), ConfigError);
}

TEST(RunExperiment, PgdOnlyWhiteBoxPersistsImagesWithinBudget) {
  const auto dir = scratch_dir("exp_pgd");
  auto cfg = small_run(dir, 4);
  cfg.methods = {AttackMethod::PgdOnly};
  cfg.cells = {{"A", "A"}};
  const auto reports = run_experiment(cfg);
  ASSERT_EQ(reports.size(), 1u);
  const auto dataset = ingest_dataset(cfg.dataset);
  for (const auto& s : dataset) {
    const auto adv = read_png(cfg.out / "adversarial" / "pgd_only" / "A" / (s.id + ".png"));
    EXPECT_LE(linf_distance(adv, s.image), cfg.attack.eps_x + 1.0 / 255 + 1e-12);
  }
  const auto texts = slurp(cfg.out / "adversarial" / "pgd_only" / "A" / "texts.tsv");
  EXPECT_EQ(std::count(texts.begin(), texts.end(), '\n'), 4);
  EXPECT_TRUE(fs::exists(cfg.out / "reports" / "pgd_only__A__A.json"));
  EXPECT_NE(slurp(cfg.out / "run.log").find("done"), std::string::npos);
}

TEST(RunExperiment, RerunGivesBitIdenticalReports) {
  const auto dir = scratch_dir("exp_det");
  auto cfg = small_run(dir, 6);
  cfg.methods = {AttackMethod::SaAttack, AttackMethod::Sep};
  cfg.out = dir / "r1";
  run_experiment(cfg);
  cfg.out = dir / "r2";
  cfg.workers = 3;
  run_experiment(cfg);
  for (const auto& e : fs::directory_iterator(dir / "r1" / "reports")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir / "r2" / "reports" / e.path().filename()));
  }
  EXPECT_EQ(slurp(dir / "r1" / "summary.csv"), slurp(dir / "r2" / "summary.csv"));
}

TEST(RunExperiment, SummaryCsvMatchesReportJson) {
  const auto dir = scratch_dir("exp_csv");
  auto cfg = small_run(dir, 5);
  run_experiment(cfg);
  std::istringstream csv(slurp(cfg.out / "summary.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "method,source,target,metric,value");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 5u);
    const auto j = Json::parse(slurp(cfg.out / "reports" / (f[0] + "__" + f[1] + "__" + f[2] + ".json")));
    EXPECT_EQ(std::stod(f[4]), j["metrics"][f[3]].get<double>());
    EXPECT_EQ(f[4], j["metrics"][f[3]].dump());
    ++rows;
  }
  EXPECT_EQ(rows, 4 * 2 * 6);
  const auto loaded = load_reports(cfg.out);
  EXPECT_EQ(loaded.size(), 8u);
  EXPECT_EQ(summary_csv(loaded).size(), slurp(cfg.out / "summary.csv").size());
  EXPECT_NE(summary_table(loaded).find("TR_R@1"), std::string::npos);
}

TEST(RunExperiment, FailureIsFlaggedInRunLog) {
  const auto dir = scratch_dir("exp_fail");
  auto cfg = small_run(dir, 2);
  fs::remove(dir / "images" / "toy001.png");
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  const auto log = slurp(cfg.out / "run.log");
  EXPECT_NE(log.find("FAILED"), std::string::npos);
  EXPECT_NE(log.find("toy001"), std::string::npos);
}

TEST(CraftPairs, WorkerCountDoesNotChangeResults) {
  const auto dir = scratch_dir("exp_workers");
  const auto cfg = small_run(dir, 6);
  const auto ds = ingest_dataset(cfg.dataset);
  const ToyDualEncoder enc(cfg.encoders[0].spec, load_vocabulary(cfg.vocabulary));
  const auto lex = Lexicon::load(cfg.lexicon);
  const auto a = craft_pairs(AttackMethod::SaAttack, ds, enc, cfg.attack, lex, {}, 1);
  const auto b = craft_pairs(AttackMethod::SaAttack, ds, enc, cfg.attack, lex, {}, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x_adv, b[i].x_adv);
    EXPECT_EQ(a[i].t_adv, b[i].t_adv);
    EXPECT_EQ(a[i].provenance.seed, entry_seed(cfg.attack.seed, ds[i].id));
  }
}

TEST(ToyDataset, CaptionsUseLexiconHeadwords) {
  ToyDatasetSpec spec;
  spec.entries = 10;
  const auto ds = make_toy_dataset(spec, bundled_lexicon());
  ASSERT_EQ(ds.samples.size(), 10u);
  for (const auto& s : ds.samples) {
    ASSERT_EQ(s.captions.size(), 1u);
    EXPECT_EQ(s.captions[0].size(), 5u);
    for (const auto& w : s.captions[0].words()) EXPECT_TRUE(bundled_lexicon().contains(w));
    EXPECT_EQ(quantize(s.image), s.image);
  }
  spec.caption_length = 1000;
  EXPECT_THROW(make_toy_dataset(spec, bundled_lexicon()), ConfigError);
}
