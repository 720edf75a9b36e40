// saattack: command-line front end.
//
//   saattack run <config.json> [--seed N] [--out DIR] [overrides...]
//   saattack attack-one --image X.png --caption "..." --method sa [--out DIR]
//   saattack report <dir> [--csv]
//   saattack toy-dataset <dir> [--entries N] [--seed N]

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "saattack/experiment.hpp"
#include "saattack/image_attack.hpp"
#include "saattack/io.hpp"

namespace fs = std::filesystem;
using namespace saattack;

namespace {

// Flags that override the matching config keys.
struct AttackOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_x, alpha, init_amplitude;
  std::optional<int> eps_t, iterations, top_k, a_x, a_t, candidates;

  void add_to(CLI::App& app) {
    app.add_option("--seed", seed, "Run seed");
    app.add_option("--eps_x", eps_x, "Image l-inf budget (intensity units)");
    app.add_option("--eps_t", eps_t, "Words changed per text-attack call");
    app.add_option("--alpha", alpha, "PGD step size");
    app.add_option("--T", iterations, "PGD iterations");
    app.add_option("--k", top_k, "Important words examined by the text attack");
    app.add_option("--A_x", a_x, "Image augmentations per source image");
    app.add_option("--A_t", a_t, "Text augmentations per source text");
    app.add_option("--init_amplitude", init_amplitude, "Initial noise amplitude");
    app.add_option("--candidates_per_position", candidates, "Proposals scored per position");
  }

  void apply(AttackConfig& c) const {
    if (seed) c.seed = *seed;
    if (eps_x) c.eps_x = *eps_x;
    if (eps_t) c.eps_t = *eps_t;
    if (alpha) c.alpha = *alpha;
    if (iterations) c.iterations = *iterations;
    if (top_k) c.top_k = *top_k;
    if (a_x) c.image_augmentations = *a_x;
    if (a_t) c.text_augmentations = *a_t;
    if (init_amplitude) c.init_amplitude = *init_amplitude;
    if (candidates) c.candidates_per_position = *candidates;
  }
};

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

int cmd_run(const fs::path& config_path, const AttackOverrides& ov, const std::optional<fs::path>& out,
            const std::optional<int>& workers, const std::vector<std::string>& methods) {
  auto cfg = load_experiment_config(config_path);
  ov.apply(cfg.attack);
  if (out) cfg.out = *out;
  if (workers) cfg.workers = *workers;
  if (!methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(parse_attack_method(m));
  }
  const auto reports = run_experiment(cfg);
  std::cout << summary_table(reports);
  std::cout << "results written to " << cfg.out.string() << "\n";
  return 0;
}

struct AttackOneArgs {
  fs::path image;
  std::string caption;
  std::string method = "sa";
  std::optional<fs::path> out, vocab, lexicon;
  std::uint64_t encoder_seed = 1;
  int patch = 8;
  int dim = 32;
};

int cmd_attack_one(const AttackOneArgs& a, const AttackOverrides& ov) {
  const auto method = parse_attack_method(a.method);
  const auto x = read_png(a.image);
  const auto t = TextSample::tokenize(a.caption);
  const Lexicon lex = a.lexicon ? Lexicon::load(*a.lexicon) : Lexicon::parse(bundled_lexicon_text());

  std::vector<std::string> vocab = a.vocab ? load_vocabulary(*a.vocab) : lexicon_vocabulary(lex);
  vocab.insert(vocab.end(), t.words().begin(), t.words().end());

  ToyEncoderSpec spec;
  spec.seed = a.encoder_seed;
  spec.patch_size = a.patch;
  spec.embedding_dim = a.dim;
  spec.image_shape = x.shape();
  const ToyDualEncoder enc(spec, vocab);

  AttackConfig cfg;
  ov.apply(cfg);
  RandomStream rng(cfg.seed);
  const auto pair = run_attack(method, x, t, enc, cfg, lex, rng);

  const auto e_ben = enc.encode_image(x), e_adv = enc.encode_image(pair.x_adv);
  const auto t_ben = enc.encode_text(t), t_adv = enc.encode_text(pair.t_adv);
  std::cout << "method      " << to_string(method) << "\n"
            << "encoder     " << enc.describe() << "\n"
            << "t_ben       " << t.join() << "\n"
            << "t_inter     " << pair.t_inter.join() << "\n"
            << "t_adv       " << pair.t_adv.join() << "\n"
            << "linf        " << linf_distance(pair.x_adv, x) << "\n"
            << "cos(ben)    " << cosine_similarity(e_ben, t_ben) << "\n"
            << "cos(adv)    " << cosine_similarity(e_adv, t_adv) << "\n";
  if (a.out) {
    fs::create_directories(*a.out);
    write_png(*a.out / "x_adv.png", pair.x_adv);
    write_file(*a.out / "t_adv.txt", pair.t_adv.join() + "\n");
    std::cout << "wrote " << (*a.out / "x_adv.png").string() << "\n";
  }
  return 0;
}

int cmd_report(const fs::path& dir, bool csv) {
  const auto reports = load_reports(dir);
  if (reports.empty()) throw ConfigError("no reports found under " + dir.string());
  std::cout << (csv ? summary_csv(reports) : summary_table(reports));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-augmented transferable attacks on dual-encoder vision-language models"};
  app.require_subcommand(1);

  AttackOverrides run_ov;
  fs::path config_path;
  std::optional<fs::path> run_out;
  std::optional<int> workers;
  std::vector<std::string> methods;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--workers", workers, "Worker threads (0 = all cores)");
  run->add_option("--methods", methods, "Methods: sa, sep, pgd_only, text_only");
  run_ov.add_to(*run);

  AttackOverrides one_ov;
  AttackOneArgs one;
  auto* attack_one = app.add_subcommand("attack-one", "Attack a single image-caption pair");
  attack_one->add_option("--image", one.image, "PNG image")->required()->check(CLI::ExistingFile);
  attack_one->add_option("--caption", one.caption, "Caption text")->required();
  attack_one->add_option("--method", one.method, "sa, sep, pgd_only or text_only")->capture_default_str();
  attack_one->add_option("--out", one.out, "Directory for x_adv.png and t_adv.txt");
  attack_one->add_option("--vocab", one.vocab, "Toy encoder vocabulary file");
  attack_one->add_option("--lexicon", one.lexicon, "Synonym lexicon file");
  attack_one->add_option("--encoder-seed", one.encoder_seed, "Toy encoder seed")->capture_default_str();
  attack_one->add_option("--patch", one.patch, "Toy encoder patch size")->capture_default_str();
  attack_one->add_option("--dim", one.dim, "Toy embedding dimension")->capture_default_str();
  one_ov.add_to(*attack_one);

  fs::path report_dir;
  bool csv = false;
  auto* report = app.add_subcommand("report", "Summarise the reports of a finished run");
  report->add_option("dir", report_dir, "Run output or reports directory")->required();
  report->add_flag("--csv", csv, "Print CSV instead of a table");

  fs::path toy_dir;
  ToyDatasetSpec toy;
  auto* toy_cmd = app.add_subcommand("toy-dataset", "Write a toy dataset and a ready-to-run config");
  toy_cmd->add_option("dir", toy_dir, "Output directory")->required();
  toy_cmd->add_option("--entries", toy.entries, "Number of entries")->capture_default_str();
  toy_cmd->add_option("--seed", toy.seed, "Dataset seed")->capture_default_str();
  toy_cmd->add_option("--caption-length", toy.caption_length, "Words per caption")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, run_ov, run_out, workers, methods);
    if (*attack_one) return cmd_attack_one(one, one_ov);
    if (*report) return cmd_report(report_dir, csv);
    if (*toy_cmd) {
      write_toy_dataset(toy_dir, toy, bundled_lexicon_text());
      std::cout << "wrote toy dataset to " << toy_dir.string() << "\n"
                << "run it with: saattack run " << (toy_dir / "config.json").string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
