#include "udft/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "udft/error.hpp"
#include "udft/log.hpp"
#include "udft/parallel.hpp"
#include "udft/pseudo_label.hpp"

namespace udft {
namespace {

namespace fs = std::filesystem;

class StageTimer {
 public:
  explicit StageTimer(std::string name) : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    log::info(name_, ": ", s, " s");
  }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

template <typename F>
auto run_stage(const std::string& name, F&& f) {
  StageTimer timer(name);
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

fs::path out_path(const PipelineConfig& config, const char* name) { return config.out_dir / name; }

void prepare_out_dir(const PipelineConfig& config) {
  fs::create_directories(config.out_dir);
  log::set_file(out_path(config, artifact::log));
  parallel::set_num_threads(config.threads);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_history(const PipelineConfig& config, const TrainHistory& history) {
  std::ofstream out(out_path(config, artifact::train_history), std::ios::trunc);
  out << "iter,loss,lr\n";
  char buf[96];
  for (std::size_t i = 0; i < history.loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", i, history.loss[i], history.lr[i]);
    out << buf;
  }
}

const FeatureDataset& require_labels(const FeatureDataset& ds, const std::string& what) {
  if (!ds.class_labels) throw ValidationError(what + " has no class labels");
  return ds;
}

void log_report(const EvalReport& report) {
  for (std::size_t c = 0; c < report.class_names.size(); ++c)
    if (report.per_class_ap[c]) log::info("evaluate: AP[", report.class_names[c], "] = ", *report.per_class_ap[c]);
  log::info("evaluate: mAP = ", report.map);
}

}  // namespace

FeatureDataset load_input(const fs::path& path, Normalize normalize) {
  if (path.empty()) throw InvalidArgument("feature file path not configured");
  FeatureDataset ds = load_features(path, format_for(path));
  if (normalize == Normalize::l2) l2_normalize(ds);
  return ds;
}

KMeansModel fit_clusters(const PipelineConfig& config, const FeatureDataset& hr_train) {
  auto model = kmeans_fit(hr_train.data, config.k, config.kmeans_options());
  log::info("cluster: k=", model.k(), " objective=", model.objective, " iterations=", model.iterations);
  return model;
}

FeatureDataset label_with_clusters(const KMeansModel& model, const FeatureDataset& lr) {
  FeatureDataset out = lr;
  const auto labeling = assign_pseudo_labels_into(model, out);
  std::size_t empty = 0;
  for (auto h : labeling.histogram) empty += h == 0;
  log::info("pseudo-label: ", labeling.labels.size(), " samples over k=", labeling.k, " (", empty,
            " pseudo-classes unused)");
  return out;
}

TrainResult fit_transfer(const PipelineConfig& config, const FeatureDataset& lr_pseudo) {
  const auto pseudo = pseudo_labeling_of(lr_pseudo);
  auto result = train(lr_pseudo, pseudo, config.n1, config.n2(), config.sgd_hyper());
  if (!result.history.loss.empty())
    log::info("train-transfer: initial loss ", result.history.loss.front(), ", final loss ",
              result.history.final_loss);
  return result;
}

FeatureDataset transfer_features(const TransferNetParams& params, const FeatureDataset& features) {
  FeatureDataset out;
  out.data = transform(params, features.data);
  out.class_labels = features.class_labels;
  return out;
}

OvrSvmModel fit_svm(const PipelineConfig& config, const FeatureDataset& train_set) {
  require_labels(train_set, "SVM training set");
  return svm_train_ovr(train_set.data, *train_set.class_labels, config.svm_options());
}

EvalReport score(const PipelineConfig& config, const std::string& method, const OvrSvmModel& svm,
                 const FeatureDataset& test) {
  require_labels(test, "test set");
  auto report = evaluate(svm, test.data, *test.class_labels, config.ap_mode, config.class_names);
  report.run_config.emplace_back("method", method);
  for (auto& kv : config.resolved()) report.run_config.push_back(std::move(kv));
  log_report(report);
  return report;
}

MethodResult run_method(const PipelineConfig& config, const FeatureDataset& hr_train, const FeatureDataset& lr_train,
                        const FeatureDataset& lr_test, const KMeansModel* cached_kmeans) {
  config.validate();
  MethodResult r;
  r.kmeans = run_stage("cluster", [&] { return cached_kmeans ? *cached_kmeans : fit_clusters(config, hr_train); });
  r.lr_train_pseudo = run_stage("pseudo-label", [&] { return label_with_clusters(r.kmeans, lr_train); });
  r.net = run_stage("train-transfer", [&] { return fit_transfer(config, r.lr_train_pseudo); });
  run_stage("transform", [&] {
    r.lr_train_transferred = transfer_features(r.net.params, lr_train);
    r.lr_test_transferred = transfer_features(r.net.params, lr_test);
    return 0;
  });
  r.svm = run_stage("train-svm", [&] { return fit_svm(config, r.lr_train_transferred); });
  r.report = run_stage("evaluate", [&] { return score(config, "transfer", r.svm, r.lr_test_transferred); });
  return r;
}

void write_report(const PipelineConfig& config, const EvalReport& report, const std::string& stem,
                  const std::string& row_label) {
  write_text(config.out_dir / (stem + ".txt"), render_report_kv(report));
  write_text(config.out_dir / (stem + "_table.txt"), render_report_table(report, row_label));
}

EvalReport run_pipeline(const PipelineConfig& config) {
  prepare_out_dir(config);
  const auto marker = out_path(config, artifact::failed);
  fs::remove(marker);
  try {
    config.validate();
    const auto hr = run_stage("load", [&] { return load_input(config.hr_train, config.normalize); });
    const auto lr_train = run_stage("load", [&] { return load_input(config.lr_train, config.normalize); });
    const auto lr_test = run_stage("load", [&] { return load_input(config.lr_test, config.normalize); });
    auto r = run_method(config, hr, lr_train, lr_test);
    run_stage("write", [&] {
      save_kmeans(r.kmeans, out_path(config, artifact::kmeans));
      save_features(r.lr_train_pseudo, out_path(config, artifact::lr_train_pseudo));
      save_checkpoint(r.net.params, out_path(config, artifact::checkpoint));
      write_history(config, r.net.history);
      save_features(r.lr_train_transferred, out_path(config, artifact::lr_train_transferred));
      save_features(r.lr_test_transferred, out_path(config, artifact::lr_test_transferred));
      save_svm(r.svm, out_path(config, artifact::svm));
      write_report(config, r.report, "report", "transfer");
      return 0;
    });
    return r.report;
  } catch (const std::exception& e) {
    const auto* se = dynamic_cast<const StageError*>(&e);
    write_text(marker, std::string("stage=") + (se ? se->stage() : "config") + "\nerror=" + e.what() + "\n");
    log::error(e.what());
    if (se) throw;
    throw StageError("config", e.what());
  }
}

EvalReport run_baseline(const PipelineConfig& config, Resolution which) {
  prepare_out_dir(config);
  const bool hr = which == Resolution::hr;
  const std::string method = hr ? "baseline-hr" : "baseline-lr";
  const auto& train_path = hr ? config.hr_train : config.lr_train;
  const auto& test_path = hr ? config.hr_test : config.lr_test;
  config.validate();
  const auto train_set = run_stage("load", [&] { return load_input(train_path, config.normalize); });
  const auto test_set = run_stage("load", [&] { return load_input(test_path, config.normalize); });
  const auto svm = run_stage("train-svm", [&] { return fit_svm(config, train_set); });
  auto report = run_stage("evaluate", [&] { return score(config, method, svm, test_set); });
  run_stage("write", [&] {
    save_svm(svm, config.out_dir / (method + ".usvm"));
    write_report(config, report, method + "_report", method);
    return 0;
  });
  return report;
}

namespace stage {

void cluster(const PipelineConfig& config) {
  prepare_out_dir(config);
  config.validate();
  const auto hr = run_stage("load", [&] { return load_input(config.hr_train, config.normalize); });
  const auto model = run_stage("cluster", [&] { return fit_clusters(config, hr); });
  save_kmeans(model, out_path(config, artifact::kmeans));
}

void pseudo_label(const PipelineConfig& config) {
  prepare_out_dir(config);
  const auto model = load_kmeans(out_path(config, artifact::kmeans));
  const auto lr = run_stage("load", [&] { return load_input(config.lr_train, config.normalize); });
  const auto labeled = run_stage("pseudo-label", [&] { return label_with_clusters(model, lr); });
  save_features(labeled, out_path(config, artifact::lr_train_pseudo));
}

void train_transfer(const PipelineConfig& config) {
  prepare_out_dir(config);
  config.validate();
  const auto lr = load_features(out_path(config, artifact::lr_train_pseudo));
  const auto result = run_stage("train-transfer", [&] { return fit_transfer(config, lr); });
  save_checkpoint(result.params, out_path(config, artifact::checkpoint));
  write_history(config, result.history);
}

void transform(const PipelineConfig& config) {
  prepare_out_dir(config);
  const auto params = load_checkpoint(out_path(config, artifact::checkpoint));
  const auto lr_train = run_stage("load", [&] { return load_input(config.lr_train, config.normalize); });
  const auto lr_test = run_stage("load", [&] { return load_input(config.lr_test, config.normalize); });
  run_stage("transform", [&] {
    save_features(transfer_features(params, lr_train), out_path(config, artifact::lr_train_transferred));
    save_features(transfer_features(params, lr_test), out_path(config, artifact::lr_test_transferred));
    return 0;
  });
}

void train_svm(const PipelineConfig& config) {
  prepare_out_dir(config);
  config.validate();
  const auto train_set = load_features(out_path(config, artifact::lr_train_transferred));
  const auto svm = run_stage("train-svm", [&] { return fit_svm(config, train_set); });
  save_svm(svm, out_path(config, artifact::svm));
}

EvalReport evaluate(const PipelineConfig& config) {
  prepare_out_dir(config);
  const auto svm = load_svm(out_path(config, artifact::svm));
  const auto test = load_features(out_path(config, artifact::lr_test_transferred));
  auto report = run_stage("evaluate", [&] { return score(config, "transfer", svm, test); });
  write_report(config, report, "report", "transfer");
  return report;
}

}  // namespace stage
}  // namespace udft
