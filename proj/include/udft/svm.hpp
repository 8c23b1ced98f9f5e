#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "udft/matrix.hpp"

namespace udft {

struct SvmOptions {
  double c = 1.0;
  /// Stop when the largest projected-gradient violation of an epoch is below tol.
  double tol = 1e-3;
  std::size_t max_iter = 1000;
  /// Seed of the per-epoch coordinate permutation.
  std::uint64_t seed = 0;

  void validate() const;
};

/// Linear decision function score(x) = x.w + b.
struct SvmModel {
  std::vector<float> w;
  float b = 0.0f;
  double c = 1.0;
  /// Dual variables sitting at the upper bound C.
  std::size_t n_sv_bounded = 0;
  /// Trained on a single class: w = 0, b = +-1.
  bool degenerate = false;

  std::size_t dim() const { return w.size(); }
};

/// Raw dual solution of the L1-hinge linear SVM with the bias folded in as a constant
/// feature 1 (so the bias is regularized along with w).
struct SvmDualSolution {
  std::vector<double> alpha;
  /// Augmented weights: p feature weights followed by the bias.
  std::vector<double> w;
  std::size_t epochs = 0;
  double max_violation = 0.0;
  bool converged = false;
};

/// Dual coordinate descent over alpha in [0, C]^n. Requires both classes present.
SvmDualSolution svm_solve_dual(const MatrixF& x, std::span<const std::int8_t> y, const SvmOptions& options);

/// ½||w~||² + C Σ max(0, 1 - y_i w~.x~_i) for augmented weights w~.
double svm_primal_objective(const MatrixF& x, std::span<const std::int8_t> y, std::span<const double> w_aug,
                            double c);
/// Σ alpha - ½||Σ alpha_i y_i x~_i||².
double svm_dual_objective(const MatrixF& x, std::span<const std::int8_t> y, std::span<const double> alpha);

/// y entries must be -1 or +1. A single-class y yields a degenerate constant model.
SvmModel svm_train_binary(const MatrixF& x, std::span<const std::int8_t> y, const SvmOptions& options = {});

std::vector<double> svm_decision(const SvmModel& model, const MatrixF& x);

struct OvrSvmModel {
  std::vector<SvmModel> models;
  std::size_t dim = 0;

  std::size_t n_classes() const { return models.size(); }
};

/// One binary SVM per class column (+1 where the label is set). Class c uses seed + c;
/// classes train in parallel when parallel::enabled().
OvrSvmModel svm_train_ovr(const MatrixF& x, const Matrix<std::uint8_t>& class_labels,
                          const SvmOptions& options = {});

/// "USVM" container: version, n_classes u32, p u64, then per class p float32 weights and
/// a float32 bias.
void save_svm(const OvrSvmModel& model, const std::filesystem::path& path);
OvrSvmModel load_svm(const std::filesystem::path& path);

}  // namespace udft
