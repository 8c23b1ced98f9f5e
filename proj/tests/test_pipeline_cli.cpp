#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "udft/cli.hpp"
#include "udft/config.hpp"
#include "udft/error.hpp"
#include "udft/feature_store.hpp"
#include "udft/log.hpp"
#include "udft/pipeline.hpp"

using namespace udft;
namespace fs = std::filesystem;

namespace {

/// Writes a small paired synthetic set (train/test splits) into `dir`.
void synth(const fs::path& dir, const std::string& noise = "1.0", const std::string& rank = "4") {
  REQUIRE(cli_dispatch({"synth", "--clusters", "3", "--per-cluster", "30", "--dim", "8", "--lr-rank", rank,
                        "--lr-noise", noise, "--separation", "8", "--seed", "2", "--train-fraction", "0.5",
                        "--split-seed", "1", "--out", dir.string(), "--quiet"}) == 0);
}

std::vector<std::string> data_flags(const fs::path& data, const fs::path& out) {
  return {"--hr-train", (data / "hr_train.udft").string(), "--hr-test", (data / "hr_test.udft").string(),
          "--lr-train", (data / "lr_train.udft").string(), "--lr-test", (data / "lr_test.udft").string(),
          "--out",      out.string(),                      "--k",       "4",
          "--n1",       "12",                              "--iters",   "80",
          "--batch-size", "16",                            "--seed",    "5",
          "--quiet"};
}

/// Report text without the output-directory line.
std::string report_body(const fs::path& out) {
  std::istringstream in(testing::slurp(out / artifact::report));
  std::string body;
  for (std::string l; std::getline(in, l);)
    if (l.rfind("config.out_dir=", 0) != 0) body += l + "\n";
  return body;
}

std::vector<std::string> with(std::string sub, std::vector<std::string> rest) {
  rest.insert(rest.begin(), std::move(sub));
  return rest;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(cli_dispatch({"frobnicate"}) == 2);
  CHECK(cli_dispatch({"pipeline", "--no-such-flag"}) == 2);
  CHECK(cli_dispatch({}) == 2);
  CHECK(cli_dispatch({"baseline", "--which", "mr"}) == 2);
  CHECK(cli_dispatch({"grid-search", "--n2", "3"}) == 2);
}

TEST_CASE("synth writes the paired files") {
  testing::TempDir dir("cli");
  synth(dir.path());
  for (auto name : {"hr.udft", "lr.udft", "hr_train.udft", "hr_test.udft", "lr_train.udft", "lr_test.udft"})
    CHECK(fs::exists(dir / name));
  auto hr = load_features(dir / "hr.udft");
  CHECK(hr.n() == 90);
  CHECK(hr.d() == 8);
  CHECK(hr.n_classes() == 3);
}

TEST_CASE("config file merge and overrides") {
  testing::TempDir dir("cfg");
  {
    std::ofstream f(dir / "a.cfg");
    f << "# comment\nk = 7\nn1=33\nlr0=0.5\nap_mode=continuous\n\nseed=9  # trailing\n";
  }
  PipelineConfig cfg;
  cfg.merge_file(dir / "a.cfg");
  CHECK(cfg.k == 7);
  CHECK(cfg.n1 == 33);
  CHECK(cfg.sgd.lr0 == 0.5);
  CHECK(cfg.ap_mode == ApMode::continuous);
  CHECK(cfg.seed == 9);
  cfg.set("n2", "11");
  CHECK(cfg.k == 11);
  CHECK(cfg.sgd_hyper().seed == 9);
  CHECK(cfg.kmeans_options().seed == 9);
  CHECK_THROWS_AS(cfg.set("bogus", "1"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("k", "seven"), InvalidArgument);

  bool has_threads = false;
  for (const auto& [k, v] : cfg.resolved()) has_threads |= k == "threads";
  CHECK(has_threads);
  for (const auto& key : config_keys()) CHECK_FALSE(key.empty());

  {
    std::ofstream f(dir / "bad.cfg");
    f << "nonsense=1\n";
  }
  CHECK(cli_dispatch({"pipeline", "--config", (dir / "bad.cfg").string(), "--quiet"}) == 1);
}

TEST_CASE("pipeline writes every artifact and the report echoes the config") {
  testing::TempDir dir("pipe");
  synth(dir / "data");
  auto flags = data_flags(dir / "data", dir / "out");
  flags.insert(flags.end(), {"--class-names", "red,green,blue"});
  REQUIRE(cli_dispatch(with("pipeline", flags)) == 0);
  for (auto name : {artifact::kmeans, artifact::lr_train_pseudo, artifact::checkpoint, artifact::train_history,
                    artifact::lr_train_transferred, artifact::lr_test_transferred, artifact::svm, artifact::report,
                    artifact::report_table, artifact::log})
    CHECK(fs::exists(dir / "out" / name));
  CHECK_FALSE(fs::exists(dir / "out" / artifact::failed));
  const auto report = testing::slurp(dir / "out" / artifact::report);
  CHECK(report.find("config.k=4") != std::string::npos);
  CHECK(report.find("config.seed=5") != std::string::npos);
  CHECK(report.find("ap.green=") != std::string::npos);
  CHECK(report.find("map=") != std::string::npos);
  auto transferred = load_features(dir / "out" / artifact::lr_test_transferred);
  CHECK(transferred.d() == 4);

  // a missing input leaves a failure marker naming the stage; a later success clears it
  auto broken = data_flags(dir / "data", dir / "out");
  broken[7] = (dir / "data" / "missing.udft").string();
  CHECK(cli_dispatch(with("pipeline", broken)) == 1);
  const auto marker = testing::slurp(dir / "out" / artifact::failed);
  CHECK(marker.find("stage=load") != std::string::npos);
  REQUIRE(cli_dispatch(with("pipeline", flags)) == 0);
  CHECK_FALSE(fs::exists(dir / "out" / artifact::failed));
  CHECK(testing::slurp(dir / "out" / artifact::report) == report);
}

TEST_CASE("chained stages reproduce the pipeline report") {
  testing::TempDir dir("chain");
  synth(dir / "data");
  REQUIRE(cli_dispatch(with("pipeline", data_flags(dir / "data", dir / "mono"))) == 0);
  for (auto stage : {"cluster", "pseudo-label", "train-transfer", "transform", "train-svm", "evaluate"})
    REQUIRE(cli_dispatch(with(stage, data_flags(dir / "data", dir / "chain"))) == 0);
  CHECK(report_body(dir / "chain") == report_body(dir / "mono"));
  CHECK(testing::slurp(dir / "chain" / artifact::checkpoint) == testing::slurp(dir / "mono" / artifact::checkpoint));
}

TEST_CASE("a stage without its inputs fails cleanly") {
  testing::TempDir dir("stage");
  synth(dir / "data");
  CHECK(cli_dispatch(with("train-svm", data_flags(dir / "data", dir / "empty"))) == 1);
}

TEST_CASE("baselines") {
  testing::TempDir dir("base");
  synth(dir / "data", "0", "8");
  auto flags = data_flags(dir / "data", dir / "out");
  REQUIRE(cli_dispatch(with("baseline", [&] {
            auto f = flags;
            f.insert(f.end(), {"--which", "hr"});
            return f;
          }())) == 0);
  CHECK(fs::exists(dir / "out" / "baseline-hr_report.txt"));
  CHECK(fs::exists(dir / "out" / "baseline-hr.usvm"));

  PipelineConfig cfg;
  cfg.hr_train = dir / "data" / "hr_train.udft";
  cfg.hr_test = dir / "data" / "hr_test.udft";
  cfg.lr_train = dir / "data" / "lr_train.udft";
  cfg.lr_test = dir / "data" / "lr_test.udft";
  cfg.out_dir = dir / "api";
  // zero noise at full rank makes the two resolutions identical
  CHECK(run_baseline(cfg, Resolution::hr).map == run_baseline(cfg, Resolution::lr).map);
  CHECK(fs::exists(dir / "api" / "baseline-lr_report_table.txt"));
}

TEST_CASE("grid-search subcommand") {
  testing::TempDir dir("grid");
  synth(dir / "data");
  auto flags = data_flags(dir / "data", dir / "out");
  // drop the scalar --k/--n1 pairs; the grid takes lists
  std::vector<std::string> f;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] == "--k" || flags[i] == "--n1") {
      ++i;
      continue;
    }
    f.push_back(flags[i]);
  }
  f.insert(f.end(), {"--n1", "8,12", "--n2", "3,4"});
  REQUIRE(cli_dispatch(with("grid-search", f)) == 0);
  const auto records = testing::slurp(dir / "out" / "grid.txt");
  CHECK(std::count(records.begin(), records.end(), '\n') == 5);
  CHECK(fs::exists(dir / "out" / "grid_table.txt"));
}
