#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "udft/matrix.hpp"

namespace udft {

struct KMeansOptions {
  std::size_t max_iter = 300;
  /// Stop once the relative objective improvement drops below tol.
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

/// k centroids in d dimensions plus fit metadata.
struct KMeansModel {
  MatrixD centroids;
  /// Sum of squared distances to the nearest centroid at `centroids`.
  double objective = 0.0;
  /// Lloyd update steps executed.
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  /// Objective after the seeding assignment and after every update step.
  std::vector<double> trace;
  /// Final assignment of the fitted rows (not persisted).
  std::vector<std::uint32_t> labels;

  std::size_t k() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }
};

/// Lloyd's algorithm with greedy k-means++ seeding. An empty cluster is reseeded to the point
/// farthest from its current centroid, so exactly k non-empty clusters come back whenever
/// the data has at least k distinct rows.
KMeansModel kmeans_fit(const MatrixF& x, std::size_t k, const KMeansOptions& options = {});

/// Index of the nearest centroid per row; ties go to the lowest index.
std::vector<std::uint32_t> kmeans_assign(const KMeansModel& model, const MatrixF& x);

double kmeans_objective(const KMeansModel& model, const MatrixF& x);

/// "UKMC" container: version, k u64, d u64, iterations u64, seed u64, objective f64,
/// centroids as k*d f64 row-major.
void save_kmeans(const KMeansModel& model, const std::filesystem::path& path);
KMeansModel load_kmeans(const std::filesystem::path& path);

}  // namespace udft
