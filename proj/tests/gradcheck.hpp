#pragma once

// Central finite-difference check of backward() in double precision.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "udft/transfer_net.hpp"

namespace gradcheck {

using Net = udft::TransferNet<double>;

struct Outcome {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates skipped because a hidden pre-activation changes sign inside [-eps, +eps].
  std::size_t skipped_kink = 0;
};

inline double loss_of(const Net& net, const udft::MatrixD& x, const std::vector<std::uint32_t>& labels) {
  return udft::loss_softmax_ce(udft::forward(net, x).logits, std::span<const std::uint32_t>(labels));
}

/// Sign pattern of X W1^T + b1, computed directly.
inline std::vector<bool> hidden_signs(const Net& net, const udft::MatrixD& x) {
  std::vector<bool> s;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t h = 0; h < net.hidden_dim(); ++h) {
      double z = net.b1[h];
      for (std::size_t t = 0; t < x.cols(); ++t) z += net.w1(h, t) * x(i, t);
      s.push_back(z > 0.0);
    }
  return s;
}

/// Relative error |a - n| / max(|a|, |n|, floor).
inline Outcome check(Net net, const udft::MatrixD& x, const std::vector<std::uint32_t>& labels, double eps = 1e-3,
                     double floor = 1e-6) {
  const Net grads = udft::backward(net, x, std::span<const std::uint32_t>(labels));
  std::vector<double> analytic;
  grads.for_each_tensor([&](auto span) { analytic.insert(analytic.end(), span.begin(), span.end()); });

  std::vector<double*> slots;
  net.for_each_tensor([&](auto span) {
    for (auto& v : span) slots.push_back(&v);
  });

  Outcome out;
  for (std::size_t p = 0; p < slots.size(); ++p) {
    const double saved = *slots[p];
    *slots[p] = saved + eps;
    const double up = loss_of(net, x, labels);
    const auto s_up = hidden_signs(net, x);
    *slots[p] = saved - eps;
    const double down = loss_of(net, x, labels);
    const auto s_down = hidden_signs(net, x);
    *slots[p] = saved;
    if (s_up != s_down) {
      ++out.skipped_kink;
      continue;
    }
    const double numeric = (up - down) / (2 * eps);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic[p] - numeric) / denom);
    ++out.checked;
  }
  return out;
}

struct Problem {
  Net net;
  udft::MatrixD x;
  std::vector<std::uint32_t> labels;
};

/// Random network with d <= 10, N1 <= 8, N2 <= 5, batch <= 6 and non-zero biases.
inline Problem random_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dd(1, 10), n1d(1, 8), n2d(2, 5), bd(1, 6);
  const std::size_t d = dd(rng), n1 = n1d(rng), n2 = n2d(rng), b = bd(rng);
  Problem p{udft::init_network<double>(d, n1, n2, rng()), udft::MatrixD(b, d), {}};
  std::normal_distribution<double> g;
  for (auto& v : p.net.b1) v = 0.3 * g(rng);
  for (auto& v : p.net.b2) v = 0.3 * g(rng);
  for (auto& v : p.x.values()) v = g(rng);
  std::uniform_int_distribution<std::uint32_t> ld(0, static_cast<std::uint32_t>(n2 - 1));
  for (std::size_t i = 0; i < b; ++i) p.labels.push_back(ld(rng));
  return p;
}

}  // namespace gradcheck
