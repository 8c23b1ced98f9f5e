#pragma once

// Orchestration: cluster HR -> pseudo-label LR -> train transfer net -> transform ->
// OVR SVM on transferred features -> AP/mAP. The monolithic run and the per-stage entry
// points share the same stage functions; the stage entry points exchange data through
// files in the output directory.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "udft/clustering.hpp"
#include "udft/config.hpp"
#include "udft/evaluation.hpp"
#include "udft/feature_store.hpp"
#include "udft/svm.hpp"
#include "udft/transfer_net.hpp"

namespace udft {

/// File names inside PipelineConfig::out_dir.
namespace artifact {
inline constexpr char kmeans[] = "kmeans.ukmc";
inline constexpr char lr_train_pseudo[] = "lr_train.pseudo.udft";
inline constexpr char checkpoint[] = "transfer.utnp";
inline constexpr char train_history[] = "train_history.txt";
inline constexpr char lr_train_transferred[] = "lr_train.transferred.udft";
inline constexpr char lr_test_transferred[] = "lr_test.transferred.udft";
inline constexpr char svm[] = "svm.usvm";
inline constexpr char report[] = "report.txt";
inline constexpr char report_table[] = "report_table.txt";
inline constexpr char log[] = "udft.log";
inline constexpr char failed[] = "FAILED";
}  // namespace artifact

enum class Resolution { hr, lr };

/// Stage failure carrying the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Load a feature file (format by extension) and apply the configured normalization.
FeatureDataset load_input(const std::filesystem::path& path, Normalize normalize);

// Pure stage functions.
KMeansModel fit_clusters(const PipelineConfig& config, const FeatureDataset& hr_train);
FeatureDataset label_with_clusters(const KMeansModel& model, const FeatureDataset& lr);
TrainResult fit_transfer(const PipelineConfig& config, const FeatureDataset& lr_pseudo);
/// Transferred features; class labels carried over, pseudo-labels dropped.
FeatureDataset transfer_features(const TransferNetParams& params, const FeatureDataset& features);
OvrSvmModel fit_svm(const PipelineConfig& config, const FeatureDataset& train);
EvalReport score(const PipelineConfig& config, const std::string& method, const OvrSvmModel& svm,
                 const FeatureDataset& test);

struct MethodResult {
  KMeansModel kmeans;
  FeatureDataset lr_train_pseudo;
  TrainResult net;
  FeatureDataset lr_train_transferred;
  FeatureDataset lr_test_transferred;
  OvrSvmModel svm;
  EvalReport report;
};

/// The full method on in-memory datasets. `cached_kmeans`, when given, must be the result of
/// fit_clusters(config, hr_train).
MethodResult run_method(const PipelineConfig& config, const FeatureDataset& hr_train, const FeatureDataset& lr_train,
                        const FeatureDataset& lr_test, const KMeansModel* cached_kmeans = nullptr);

/// Monolithic run: loads inputs, runs every stage, writes all artifacts and the reports.
/// On failure writes out_dir/FAILED and rethrows as StageError.
EvalReport run_pipeline(const PipelineConfig& config);

/// OVR SVM directly on raw features of one resolution, evaluated on the matching test file.
EvalReport run_baseline(const PipelineConfig& config, Resolution which);

/// Stage entry points (file based). Each reads its inputs from config paths / out_dir.
namespace stage {
void cluster(const PipelineConfig& config);
void pseudo_label(const PipelineConfig& config);
void train_transfer(const PipelineConfig& config);
void transform(const PipelineConfig& config);
void train_svm(const PipelineConfig& config);
EvalReport evaluate(const PipelineConfig& config);
}  // namespace stage

/// Writes report.txt / report_table.txt style files under out_dir with the given stem.
void write_report(const PipelineConfig& config, const EvalReport& report, const std::string& stem,
                  const std::string& row_label);

}  // namespace udft
