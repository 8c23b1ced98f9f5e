#pragma once

// Independent reference computations for the tests. Nothing here calls into the code
// paths it checks: distances use the direct difference form, AP enumerates thresholds,
// the SVM oracle enumerates primal active sets, gradients use central differences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "udft/matrix.hpp"

namespace oracle {

using udft::Matrix;
using udft::MatrixD;
using udft::MatrixF;

inline double sq_dist(const MatrixF& x, std::size_t i, const MatrixD& c, std::size_t j) {
  double s = 0.0;
  for (std::size_t t = 0; t < x.cols(); ++t) {
    const double diff = static_cast<double>(x(i, t)) - c(j, t);
    s += diff * diff;
  }
  return s;
}

/// Exhaustive scan; strict < keeps the lowest index on ties.
inline std::vector<std::uint32_t> nearest(const MatrixF& x, const MatrixD& c) {
  std::vector<std::uint32_t> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.rows(); ++j) {
      const double d = sq_dist(x, i, c, j);
      if (d < best) {
        best = d;
        out[i] = static_cast<std::uint32_t>(j);
      }
    }
  }
  return out;
}

inline double objective(const MatrixF& x, const MatrixD& c) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.rows(); ++j) best = std::min(best, sq_dist(x, i, c, j));
    total += best;
  }
  return total;
}

/// Within-cluster SSE of a labeling (centroids = means of the parts).
inline double partition_cost(const MatrixF& x, const std::vector<std::uint32_t>& labels, std::size_t k) {
  MatrixD mean(k, x.cols(), 0.0);
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    count[labels[i]] += 1.0;
    for (std::size_t t = 0; t < x.cols(); ++t) mean(labels[i], t) += x(i, t);
  }
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t t = 0; t < x.cols(); ++t)
      if (count[j] > 0) mean(j, t) /= count[j];
  double cost = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) cost += sq_dist(x, i, mean, labels[i]);
  return cost;
}

/// Minimum SSE over every assignment of n points to at most k clusters (k^n labelings).
inline double optimal_partition_cost(const MatrixF& x, std::size_t k) {
  const std::size_t n = x.rows();
  std::vector<std::uint32_t> labels(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    best = std::min(best, partition_cost(x, labels, k));
    std::size_t i = 0;
    while (i < n && ++labels[i] == k) labels[i++] = 0;
    if (i == n) break;
  }
  return best;
}

/// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  std::map<std::uint32_t, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ca[a[i]] += 1;
    cb[b[i]] += 1;
  }
  auto c2 = [](double v) { return v * (v - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (auto& [_, v] : joint) index += c2(v);
  for (auto& [_, v] : ca) sa += c2(v);
  for (auto& [_, v] : cb) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2;
  return (index - expected) / (max_index - expected);
}

/// Continuous AP by enumerating every cut of the stable descending ranking: for each
/// recall level r = 1..P the interpolated precision is the best precision over all cuts
/// that reach at least r true positives.
inline double ap_by_thresholds(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  // insertion sort: stable, obviously correct
  for (std::size_t i = 1; i < m; ++i)
    for (std::size_t j = i; j > 0 && scores[order[j - 1]] < scores[order[j]]; --j) std::swap(order[j - 1], order[j]);
  std::vector<std::size_t> tp(m + 1, 0);
  for (std::size_t cut = 1; cut <= m; ++cut) tp[cut] = tp[cut - 1] + labels[order[cut - 1]];
  const std::size_t positives = tp[m];
  double sum = 0.0;
  for (std::size_t r = 1; r <= positives; ++r) {
    double best = 0.0;
    for (std::size_t cut = 1; cut <= m; ++cut)
      if (tp[cut] >= r) best = std::max(best, static_cast<double>(tp[cut]) / static_cast<double>(cut));
    sum += best;
  }
  return sum / static_cast<double>(positives);
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

/// Exact minimizer of ½||w~||² + C Σ max(0, 1 - y_i w~.x~_i) (bias as augmented feature)
/// by enumerating primal active sets. Every point is either beyond the margin, on it, or
/// violating; for each split with linearly independent margin vectors the equality
/// constrained QP is solved in closed form and the KKT conditions are checked. The
/// objective is strongly convex, so the KKT point is the unique optimum. Returns the
/// augmented weights (p weights followed by the bias).
inline std::optional<std::vector<double>> svm_active_set(const MatrixF& x, const std::vector<std::int8_t>& y,
                                                         double c) {
  const std::size_t n = x.rows(), p = x.cols(), q = p + 1;
  auto aug = [&](std::size_t i) {
    std::vector<double> v(q);
    for (std::size_t t = 0; t < p; ++t) v[t] = y[i] * static_cast<double>(x(i, t));
    v[p] = y[i];
    return v;  // y_i x~_i
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
    return s;
  };
  std::vector<int> role(n, 0);  // 0 beyond margin, 1 on margin, 2 violating
  const double eps = 1e-9;
  while (true) {
    std::vector<std::size_t> margin;
    std::vector<double> base(q, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (role[i] == 1) margin.push_back(i);
      if (role[i] == 2) {
        const auto v = aug(i);
        for (std::size_t t = 0; t < q; ++t) base[t] += c * v[t];
      }
    }
    if (margin.size() <= q) {
      // w = base + Σ beta_m z_m with z_m . w = 1 for every margin point
      const std::size_t m = margin.size();
      std::vector<std::vector<double>> g(m, std::vector<double>(m));
      std::vector<double> rhs(m);
      for (std::size_t a = 0; a < m; ++a) {
        const auto za = aug(margin[a]);
        rhs[a] = 1.0 - dot(za, base);
        for (std::size_t b = 0; b < m; ++b) g[a][b] = dot(za, aug(margin[b]));
      }
      auto beta = m ? solve(g, rhs) : std::optional<std::vector<double>>(std::vector<double>{});
      if (beta) {
        std::vector<double> w = base;
        bool ok = true;
        for (std::size_t a = 0; a < m && ok; ++a) {
          if ((*beta)[a] < -eps || (*beta)[a] > c + eps) ok = false;
          const auto za = aug(margin[a]);
          for (std::size_t t = 0; t < q; ++t) w[t] += (*beta)[a] * za[t];
        }
        for (std::size_t i = 0; i < n && ok; ++i) {
          const double f = dot(aug(i), w);
          if (role[i] == 0 && f < 1.0 - eps) ok = false;
          if (role[i] == 2 && f > 1.0 + eps) ok = false;
        }
        if (ok) return w;
      }
    }
    std::size_t i = 0;
    while (i < n && ++role[i] == 3) role[i++] = 0;
    if (i == n) return std::nullopt;
  }
}

}  // namespace oracle
