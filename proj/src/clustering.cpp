#include "udft/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "udft/binary_io.hpp"
#include "udft/error.hpp"
#include "udft/kernels.hpp"
#include "udft/parallel.hpp"

namespace udft {
namespace {

constexpr char kMagic[] = "UKMC";
constexpr std::uint32_t kVersion = 1;

void check_dims(const KMeansModel& model, const MatrixF& x) {
  if (x.cols() != model.dim())
    throw DimensionMismatch("data has " + std::to_string(x.cols()) + " columns, centroids have " +
                            std::to_string(model.dim()));
}

double assign_all(const MatrixF& x, const MatrixD& centroids, std::vector<std::uint32_t>& labels,
                  std::vector<double>& dist) {
  const auto norms = kernels::row_sq_norms(centroids);
  labels.resize(x.rows());
  dist.resize(x.rows());
  kernels::nearest_centroid(x, centroids, norms, labels, dist);
  double total = 0.0;
  for (double v : dist) total += v;
  return total;
}

void copy_row(const MatrixF& x, std::size_t i, MatrixD& centroids, std::size_t j) {
  for (std::size_t t = 0; t < x.cols(); ++t) centroids(j, t) = static_cast<double>(x(i, t));
}

// Index drawn with probability proportional to d2 (d2 sums to `total` > 0).
std::size_t sample_d2(const std::vector<double>& d2, double total, double u) {
  const double target = u * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < d2.size(); ++i) {
    cum += d2[i];
    if (cum > target && d2[i] > 0.0) return i;
  }
  // round-off can leave target >= cum; take the last point with positive weight
  for (std::size_t i = d2.size(); i-- > 0;)
    if (d2[i] > 0.0) return i;
  return d2.size() - 1;
}

// min(d2[i], |x_i - x_c|^2) for every row; rows are independent.
void min_dist_to_row(const MatrixF& x, std::size_t c, const std::vector<double>& d2, std::vector<double>& out) {
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  const std::size_t d = x.cols();
  const float* cr = x.row(c).data();
#pragma omp parallel for schedule(static) num_threads(parallel::num_threads()) if (parallel::enabled())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const float* r = x.row(static_cast<std::size_t>(i)).data();
    double s = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double diff = static_cast<double>(r[t]) - static_cast<double>(cr[t]);
      s += diff * diff;
    }
    out[i] = std::min(d2[i], s);
  }
}

// Greedy k-means++: each step draws 2 + floor(ln k) D^2-weighted candidates and keeps the
// one that lowers the potential most.
MatrixD kmeanspp_seed(const MatrixF& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  MatrixD centroids(k, x.cols());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));

  const std::size_t first = pick(rng);
  copy_row(x, first, centroids, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity()), cand(n), best_d2(n);
  min_dist_to_row(x, first, d2, d2);

  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) {
      copy_row(x, pick(rng), centroids, j);
      continue;
    }
    std::size_t best = n;
    double best_total = std::numeric_limits<double>::infinity();
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const std::size_t c = sample_d2(d2, total, unit(rng));
      min_dist_to_row(x, c, d2, cand);
      double pot = 0.0;
      for (double v : cand) pot += v;
      if (pot < best_total) {
        best_total = pot;
        best = c;
        best_d2.swap(cand);
      }
    }
    copy_row(x, best, centroids, j);
    d2.swap(best_d2);
  }
  return centroids;
}

// Means of the current partition. `dist` holds each point's distance to its assigned
// centroid; empty clusters take the farthest not-yet-used point.
void update_centroids(const MatrixF& x, const std::vector<std::uint32_t>& labels, std::vector<double> dist,
                      MatrixD& centroids) {
  const std::size_t k = centroids.rows(), d = x.cols();
  MatrixD sums(k, d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto* s = sums.row(labels[i]).data();
    const float* row = x.row(i).data();
    for (std::size_t t = 0; t < d; ++t) s[t] += static_cast<double>(row[t]);
    ++counts[labels[i]];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) {
      const double inv = 1.0 / static_cast<double>(counts[j]);
      for (std::size_t t = 0; t < d; ++t) centroids(j, t) = sums(j, t) * inv;
      continue;
    }
    const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    copy_row(x, far, centroids, j);
    dist[far] = -1.0;
  }
}

}  // namespace

KMeansModel kmeans_fit(const MatrixF& x, std::size_t k, const KMeansOptions& options) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (k > x.rows())
    throw InvalidArgument("k=" + std::to_string(k) + " exceeds sample count " + std::to_string(x.rows()));
  if (!(options.tol >= 0.0)) throw InvalidArgument("tol must be >= 0");

  std::mt19937_64 rng(options.seed);
  KMeansModel model;
  model.seed = options.seed;
  model.centroids = kmeanspp_seed(x, k, rng);

  std::vector<std::uint32_t> labels, next;
  std::vector<double> dist;
  double objective = assign_all(x, model.centroids, labels, dist);
  model.trace.push_back(objective);

  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    update_centroids(x, labels, dist, model.centroids);
    const double prev = objective;
    objective = assign_all(x, model.centroids, next, dist);
    model.trace.push_back(objective);
    model.iterations = it;
    const bool changed = next != labels;
    labels.swap(next);
    if (!changed) break;
    if (prev <= 0.0 || prev - objective <= options.tol * prev) break;
  }
  model.objective = objective;
  model.labels = std::move(labels);
  return model;
}

std::vector<std::uint32_t> kmeans_assign(const KMeansModel& model, const MatrixF& x) {
  check_dims(model, x);
  std::vector<std::uint32_t> labels;
  std::vector<double> dist;
  assign_all(x, model.centroids, labels, dist);
  return labels;
}

double kmeans_objective(const KMeansModel& model, const MatrixF& x) {
  check_dims(model, x);
  std::vector<std::uint32_t> labels;
  std::vector<double> dist;
  return assign_all(x, model.centroids, labels, dist);
}

void save_kmeans(const KMeansModel& model, const std::filesystem::path& path) {
  io::Writer w(kMagic, kVersion);
  w.put<std::uint64_t>(model.k());
  w.put<std::uint64_t>(model.dim());
  w.put<std::uint64_t>(model.iterations);
  w.put<std::uint64_t>(model.seed);
  w.put<double>(model.objective);
  w.put_span(model.centroids.values());
  w.write_to(path);
}

KMeansModel load_kmeans(const std::filesystem::path& path) {
  io::Reader r(path, kMagic, kVersion);
  KMeansModel model;
  const auto k = r.get<std::uint64_t>();
  const auto d = r.get<std::uint64_t>();
  model.iterations = r.get<std::uint64_t>();
  model.seed = r.get<std::uint64_t>();
  model.objective = r.get<double>();
  if (k * d * sizeof(double) != r.remaining())
    throw CorruptionError(r.source() + ": centroid payload does not match k=" + std::to_string(k) +
                          ", d=" + std::to_string(d));
  model.centroids = MatrixD(k, d);
  r.get_span(model.centroids.values());
  for (double v : model.centroids.values())
    if (!std::isfinite(v)) throw ValidationError(r.source() + ": centroid contains NaN/Inf");
  return model;
}

}  // namespace udft
