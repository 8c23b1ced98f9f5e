#include "udft/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "udft/config.hpp"
#include "udft/feature_store.hpp"
#include "udft/grid_search.hpp"
#include "udft/log.hpp"
#include "udft/parallel.hpp"
#include "udft/pipeline.hpp"

namespace udft {
namespace {

namespace fs = std::filesystem;

// Flags shared by every pipeline-facing subcommand. Each maps onto a PipelineConfig key;
// values given on the command line override the --config file.
struct CommonFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  bool quiet = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
    static const std::vector<std::pair<std::string, std::string>> flags{
        {"--hr-train", "hr_train"},   {"--hr-test", "hr_test"},
        {"--lr-train", "lr_train"},   {"--lr-test", "lr_test"},
        {"--out", "out_dir"},         {"--k", "k"},
        {"--n1", "n1"},               {"--n2", "n2"},
        {"--kmeans-max-iter", "kmeans_max_iter"}, {"--kmeans-tol", "kmeans_tol"},
        {"--lr", "lr0"},              {"--momentum", "momentum"},
        {"--weight-decay", "weight_decay"}, {"--batch-size", "batch_size"},
        {"--step-size", "step_size"}, {"--gamma", "gamma"},
        {"--iters", "total_iters"},   {"--svm-c", "svm_c"},
        {"--svm-tol", "svm_tol"},     {"--svm-max-iter", "svm_max_iter"},
        {"--ap-mode", "ap_mode"},     {"--normalize", "normalize"},
        {"--seed", "seed"},           {"--threads", "threads"},
        {"--class-names", "class_names"}};
    for (const auto& [flag, key] : flags) {
      app->add_option_function<std::string>(flag, [this, key = key](const std::string& v) { values[key] = v; },
                                            "config key " + key);
    }
    app->add_flag("--quiet", quiet, "only warnings and errors on stderr");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (const char* env = std::getenv("UDFT_THREADS")) cfg.set("threads", env);
    if (!config_file.empty()) cfg.merge_file(config_file);
    for (const auto& [k, v] : values) cfg.set(k, v);
    cfg.validate();
    log::set_quiet(quiet);
    parallel::set_num_threads(cfg.threads);
    return cfg;
  }
};

std::vector<std::size_t> widths_or_throw(const std::vector<std::size_t>& v, const char* flag) {
  if (v.empty()) throw CLI::ValidationError(flag, "at least one width required");
  return v;
}

int run_synth(const SyntheticConfig& sc, const std::string& out, std::optional<double> train_fraction,
              std::uint64_t split_seed) {
  fs::create_directories(out);
  const auto pair = generate_synthetic(sc);
  save_features(pair.hr, fs::path(out) / "hr.udft");
  save_features(pair.lr, fs::path(out) / "lr.udft");
  if (train_fraction) {
    auto [hr_train, hr_test] = split(pair.hr, *train_fraction, split_seed);
    auto [lr_train, lr_test] = split(pair.lr, *train_fraction, split_seed);
    save_features(hr_train, fs::path(out) / "hr_train.udft");
    save_features(hr_test, fs::path(out) / "hr_test.udft");
    save_features(lr_train, fs::path(out) / "lr_train.udft");
    save_features(lr_test, fs::path(out) / "lr_test.udft");
  }
  log::info("synth: wrote ", pair.hr.n(), " paired samples (d=", sc.d, ") to ", out);
  return 0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Unsupervised deep feature transfer toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a paired HR/LR synthetic dataset");
  SyntheticConfig sc;
  std::string synth_out = "data";
  std::optional<double> train_fraction;
  std::uint64_t split_seed = 0;
  synth->add_option("--clusters", sc.n_clusters, "latent classes")->check(CLI::PositiveNumber);
  synth->add_option("--per-cluster", sc.n_per_cluster, "samples per class")->check(CLI::PositiveNumber);
  synth->add_option("--dim", sc.d, "feature dimension")->check(CLI::PositiveNumber);
  synth->add_option("--separation", sc.hr_separation, "distance between class means (std units)");
  synth->add_option("--lr-rank", sc.lr_rank, "rank of the LR degradation projection")->check(CLI::PositiveNumber);
  synth->add_option("--lr-noise", sc.lr_noise_sigma, "LR additive noise std");
  synth->add_option("--seed", sc.seed, "RNG seed");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--train-fraction", train_fraction, "also write paired train/test splits");
  synth->add_option("--split-seed", split_seed, "seed of the train/test split");
  synth->add_flag("--quiet", [](std::int64_t) { log::set_quiet(true); }, "only warnings and errors");

  struct Stage {
    const char* name;
    const char* help;
  };
  const std::vector<Stage> stages{{"cluster", "k-means on HR training features"},
                                  {"pseudo-label", "assign LR training features to HR centroids"},
                                  {"train-transfer", "train the transfer network on pseudo-labels"},
                                  {"transform", "emit transferred LR train/test features"},
                                  {"train-svm", "one-vs-rest linear SVMs on transferred features"},
                                  {"evaluate", "per-class AP and mAP on transferred test features"},
                                  {"pipeline", "all stages in one run"}};
  std::map<std::string, CommonFlags> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& s : stages) {
    subs[s.name] = app.add_subcommand(s.name, s.help);
    flags[s.name].attach(subs[s.name]);
  }

  auto* baseline = app.add_subcommand("baseline", "OVR SVM directly on raw HR or LR features");
  flags["baseline"].attach(baseline);
  std::string which = "lr";
  baseline->add_option("--which", which, "hr or lr")->check(CLI::IsMember({"hr", "lr"}));

  auto* grid = app.add_subcommand("grid-search", "sweep (N1, N2) and tabulate mAP");
  flags["grid-search"].attach(grid);
  std::vector<std::size_t> grid_n1, grid_n2;
  bool parallel_cells = false;
  // --n1/--n2 are lists here and replace the scalar config flags
  grid->remove_option(grid->get_option("--n1"));
  grid->remove_option(grid->get_option("--n2"));
  grid->add_option("--n1", grid_n1, "comma separated N1 widths")->delimiter(',')->required();
  grid->add_option("--n2", grid_n2, "comma separated N2 widths (= k)")->delimiter(',')->required();
  grid->add_flag("--parallel-cells", parallel_cells, "run grid cells concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (synth->parsed()) return run_synth(sc, synth_out, train_fraction, split_seed);

    for (auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const PipelineConfig cfg = flags[name].resolve();
      if (name == "cluster") stage::cluster(cfg);
      else if (name == "pseudo-label") stage::pseudo_label(cfg);
      else if (name == "train-transfer") stage::train_transfer(cfg);
      else if (name == "transform") stage::transform(cfg);
      else if (name == "train-svm") stage::train_svm(cfg);
      else if (name == "evaluate") std::cout << render_report_table(stage::evaluate(cfg), "transfer");
      else if (name == "pipeline") std::cout << render_report_table(run_pipeline(cfg), "transfer");
      return 0;
    }

    if (baseline->parsed()) {
      const PipelineConfig cfg = flags["baseline"].resolve();
      const auto res = which == "hr" ? Resolution::hr : Resolution::lr;
      std::cout << render_report_table(run_baseline(cfg, res), which == "hr" ? "baseline-hr" : "baseline-lr");
      return 0;
    }

    if (grid->parsed()) {
      GridSpec spec;
      spec.base_config = flags["grid-search"].resolve();
      spec.n1_values = widths_or_throw(grid_n1, "--n1");
      spec.n2_values = widths_or_throw(grid_n2, "--n2");
      spec.parallel_cells = parallel_cells;
      const auto& cfg = spec.base_config;
      fs::create_directories(cfg.out_dir);
      log::set_file(cfg.out_dir / artifact::log);
      const auto hr = load_input(cfg.hr_train, cfg.normalize);
      const auto lr_train = load_input(cfg.lr_train, cfg.normalize);
      const auto lr_test = load_input(cfg.lr_test, cfg.normalize);
      const auto result = run_grid(spec, hr, lr_train, lr_test);
      const auto table = render_grid(result);
      write_text(cfg.out_dir / "grid.txt", render_grid_records(result));
      write_text(cfg.out_dir / "grid_table.txt", table);
      std::cout << table;
      return result.best ? 0 : 1;
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int cli_dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"udft"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace udft
