#pragma once

// Dense kernels behind clustering and the transfer network.
//
// Every kernel exists twice: `serial` is the reference loop nest kept for tests and
// benchmarks, `omp` parallelizes the outer loop over independent output rows. Both
// variants evaluate each output element with the same summation order, so their
// results are bitwise identical regardless of thread count. All sums accumulate in
// double.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "udft/matrix.hpp"
#include "udft/parallel.hpp"

namespace udft::kernels {

namespace detail {

// out(i, :) = bias + a(i, :) * b^T
template <typename TA, typename TB, typename TOut>
inline void affine_nt_row(const Matrix<TA>& a, const Matrix<TB>& b, std::span<const TB> bias,
                          Matrix<TOut>& out, std::size_t i) {
  const TA* x = a.row(i).data();
  const std::size_t k = a.cols();
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const TB* w = b.row(j).data();
    double acc = 0.0;
    for (std::size_t t = 0; t < k; ++t) acc += static_cast<double>(x[t]) * static_cast<double>(w[t]);
    if (!bias.empty()) acc += static_cast<double>(bias[j]);
    out(i, j) = static_cast<TOut>(acc);
  }
}

// out(j, :) = sum_i a(i, j) * b(i, :)
template <typename TA, typename TB, typename TOut>
inline void gemm_tn_row(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out, std::size_t j,
                        std::vector<double>& acc) {
  acc.assign(b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double s = static_cast<double>(a(i, j));
    if (s == 0.0) continue;
    const TB* src = b.row(i).data();
    for (std::size_t t = 0; t < b.cols(); ++t) acc[t] += s * static_cast<double>(src[t]);
  }
  for (std::size_t t = 0; t < b.cols(); ++t) out(j, t) = static_cast<TOut>(acc[t]);
}

// out(i, :) = sum_j a(i, j) * b(j, :)
template <typename TA, typename TB, typename TOut>
inline void gemm_nn_row(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out, std::size_t i,
                        std::vector<double>& acc) {
  acc.assign(b.cols(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double s = static_cast<double>(a(i, j));
    if (s == 0.0) continue;
    const TB* src = b.row(j).data();
    for (std::size_t t = 0; t < b.cols(); ++t) acc[t] += s * static_cast<double>(src[t]);
  }
  for (std::size_t t = 0; t < b.cols(); ++t) out(i, t) = static_cast<TOut>(acc[t]);
}

template <typename TX>
inline void nearest_centroid_row(const Matrix<TX>& x, const MatrixD& centroids,
                                 std::span<const double> centroid_sq_norms,
                                 std::span<std::uint32_t> labels, std::span<double> dist,
                                 std::size_t i) {
  const TX* row = x.row(i).data();
  const std::size_t d = x.cols();
  double x_sq = 0.0;
  for (std::size_t t = 0; t < d; ++t) x_sq += static_cast<double>(row[t]) * static_cast<double>(row[t]);
  double best = 0.0;
  std::uint32_t best_j = 0;
  for (std::size_t j = 0; j < centroids.rows(); ++j) {
    const double* c = centroids.row(j).data();
    double dot = 0.0;
    for (std::size_t t = 0; t < d; ++t) dot += static_cast<double>(row[t]) * c[t];
    double d2 = x_sq + centroid_sq_norms[j] - 2.0 * dot;
    if (d2 < 0.0) d2 = 0.0;
    // strict < keeps the lowest index on ties
    if (j == 0 || d2 < best) {
      best = d2;
      best_j = static_cast<std::uint32_t>(j);
    }
  }
  labels[i] = best_j;
  dist[i] = best;
}

}  // namespace detail

namespace serial {

/// out = a * b^T + bias (bias broadcast over rows, may be empty). a: m x k, b: n x k.
template <typename TA, typename TB, typename TOut>
void affine_nt(const Matrix<TA>& a, const Matrix<TB>& b, std::span<const TB> bias, Matrix<TOut>& out) {
  for (std::size_t i = 0; i < a.rows(); ++i) detail::affine_nt_row(a, b, bias, out, i);
}

/// out = a^T * b. a: m x n, b: m x k, out: n x k.
template <typename TA, typename TB, typename TOut>
void gemm_tn(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out) {
  std::vector<double> acc;
  for (std::size_t j = 0; j < a.cols(); ++j) detail::gemm_tn_row(a, b, out, j, acc);
}

/// out = a * b. a: m x n, b: n x k, out: m x k.
template <typename TA, typename TB, typename TOut>
void gemm_nn(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out) {
  std::vector<double> acc;
  for (std::size_t i = 0; i < a.rows(); ++i) detail::gemm_nn_row(a, b, out, i, acc);
}

/// Squared Euclidean distance to the nearest centroid, ties to the lowest index.
template <typename TX>
void nearest_centroid(const Matrix<TX>& x, const MatrixD& centroids,
                      std::span<const double> centroid_sq_norms, std::span<std::uint32_t> labels,
                      std::span<double> dist) {
  for (std::size_t i = 0; i < x.rows(); ++i)
    detail::nearest_centroid_row(x, centroids, centroid_sq_norms, labels, dist, i);
}

}  // namespace serial

namespace omp {

template <typename TA, typename TB, typename TOut>
void affine_nt(const Matrix<TA>& a, const Matrix<TB>& b, std::span<const TB> bias, Matrix<TOut>& out) {
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) num_threads(parallel::num_threads())
  for (std::ptrdiff_t i = 0; i < m; ++i)
    detail::affine_nt_row(a, b, bias, out, static_cast<std::size_t>(i));
}

template <typename TA, typename TB, typename TOut>
void gemm_tn(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out) {
  const auto n = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel num_threads(parallel::num_threads())
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) detail::gemm_tn_row(a, b, out, static_cast<std::size_t>(j), acc);
  }
}

template <typename TA, typename TB, typename TOut>
void gemm_nn(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out) {
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel num_threads(parallel::num_threads())
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) detail::gemm_nn_row(a, b, out, static_cast<std::size_t>(i), acc);
  }
}

template <typename TX>
void nearest_centroid(const Matrix<TX>& x, const MatrixD& centroids,
                      std::span<const double> centroid_sq_norms, std::span<std::uint32_t> labels,
                      std::span<double> dist) {
  const auto m = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static) num_threads(parallel::num_threads())
  for (std::ptrdiff_t i = 0; i < m; ++i)
    detail::nearest_centroid_row(x, centroids, centroid_sq_norms, labels, dist, static_cast<std::size_t>(i));
}

}  // namespace omp

// Dispatchers: OpenMP path when parallel::enabled(), serial reference otherwise.

template <typename TA, typename TB, typename TOut>
void affine_nt(const Matrix<TA>& a, const Matrix<TB>& b, std::span<const TB> bias, Matrix<TOut>& out) {
  if (parallel::enabled()) omp::affine_nt(a, b, bias, out);
  else serial::affine_nt(a, b, bias, out);
}

template <typename TA, typename TB, typename TOut>
void gemm_tn(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out) {
  if (parallel::enabled()) omp::gemm_tn(a, b, out);
  else serial::gemm_tn(a, b, out);
}

template <typename TA, typename TB, typename TOut>
void gemm_nn(const Matrix<TA>& a, const Matrix<TB>& b, Matrix<TOut>& out) {
  if (parallel::enabled()) omp::gemm_nn(a, b, out);
  else serial::gemm_nn(a, b, out);
}

template <typename TX>
void nearest_centroid(const Matrix<TX>& x, const MatrixD& centroids,
                      std::span<const double> centroid_sq_norms, std::span<std::uint32_t> labels,
                      std::span<double> dist) {
  if (parallel::enabled()) omp::nearest_centroid(x, centroids, centroid_sq_norms, labels, dist);
  else serial::nearest_centroid(x, centroids, centroid_sq_norms, labels, dist);
}

/// Squared L2 norm of each row, accumulated in double.
std::vector<double> row_sq_norms(const MatrixD& m);

}  // namespace udft::kernels
