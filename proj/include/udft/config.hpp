#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "udft/clustering.hpp"
#include "udft/evaluation.hpp"
#include "udft/svm.hpp"
#include "udft/transfer_net.hpp"

namespace udft {

enum class Normalize { none, l2 };

/// Everything a pipeline run needs. Defaults are the VOC2007 setup: N1=4096,
/// N2=k=100, SGD lr 0.01 / momentum 0.9 / weight decay 5e-4 / batch 1000, lr divided by 10
/// every 15000 iterations.
struct PipelineConfig {
  std::filesystem::path hr_train;
  std::filesystem::path hr_test;  // only needed by the HR baseline
  std::filesystem::path lr_train;
  std::filesystem::path lr_test;
  std::filesystem::path out_dir = "udft_out";

  std::size_t k = 100;  // also N2
  std::size_t n1 = 4096;
  KMeansOptions kmeans;
  SgdHyper sgd;
  SvmOptions svm;
  ApMode ap_mode = ApMode::voc11;
  Normalize normalize = Normalize::none;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> class_names;

  std::size_t n2() const { return k; }

  /// Assign one key. "k" and "n2" are the same setting. Throws InvalidArgument for an
  /// unknown key or an unparsable value.
  void set(const std::string& key, const std::string& value);

  /// Read a flat key=value file ('#' starts a comment) on top of the current values.
  void merge_file(const std::filesystem::path& path);

  /// Fully resolved settings in a fixed order, suitable for echoing into reports.
  std::vector<std::pair<std::string, std::string>> resolved() const;

  /// Option structs with the run seed applied.
  KMeansOptions kmeans_options() const;
  SgdHyper sgd_hyper() const;
  SvmOptions svm_options() const;

  void validate() const;
};

/// Every key accepted by PipelineConfig::set, in resolved() order.
const std::vector<std::string>& config_keys();

}  // namespace udft
