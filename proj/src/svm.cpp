#include "udft/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "udft/binary_io.hpp"
#include "udft/error.hpp"
#include "udft/log.hpp"
#include "udft/parallel.hpp"

namespace udft {
namespace {

constexpr char kMagic[] = "USVM";
constexpr std::uint32_t kVersion = 1;

void check_problem(const MatrixF& x, std::span<const std::int8_t> y) {
  if (x.rows() == 0) throw InvalidArgument("SVM training needs at least one sample");
  if (y.size() != x.rows())
    throw DimensionMismatch(std::to_string(y.size()) + " targets for " + std::to_string(x.rows()) + " rows");
  for (auto v : y)
    if (v != 1 && v != -1) throw InvalidArgument("SVM targets must be -1 or +1");
}

// w~ . x~_i with the constant bias feature appended
double augmented_dot(std::span<const double> w, std::span<const float> x) {
  double s = w[x.size()];
  for (std::size_t t = 0; t < x.size(); ++t) s += w[t] * static_cast<double>(x[t]);
  return s;
}

}  // namespace

void SvmOptions::validate() const {
  if (!(c > 0.0)) throw InvalidArgument("SVM C must be > 0");
  if (!(tol > 0.0)) throw InvalidArgument("SVM tol must be > 0");
}

SvmDualSolution svm_solve_dual(const MatrixF& x, std::span<const std::int8_t> y, const SvmOptions& options) {
  options.validate();
  check_problem(x, y);
  const std::size_t n = x.rows(), p = x.cols();
  const double c = options.c;

  SvmDualSolution sol;
  sol.alpha.assign(n, 0.0);
  sol.w.assign(p + 1, 0.0);

  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 1.0;
    for (float v : x.row(i)) s += static_cast<double>(v) * v;
    qd[i] = s;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);

  for (std::size_t epoch = 0; epoch < options.max_iter; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double max_violation = 0.0;
    for (std::size_t i : order) {
      const auto row = x.row(i);
      const double yi = y[i];
      const double grad = yi * augmented_dot(sol.w, row) - 1.0;
      double& a = sol.alpha[i];
      double pg = grad;
      if (a <= 0.0) pg = std::min(grad, 0.0);
      else if (a >= c) pg = std::max(grad, 0.0);
      max_violation = std::max(max_violation, std::abs(pg));
      if (std::abs(pg) <= 1e-12) continue;
      const double old = a;
      a = std::clamp(a - grad / qd[i], 0.0, c);
      const double delta = (a - old) * yi;
      for (std::size_t t = 0; t < p; ++t) sol.w[t] += delta * static_cast<double>(row[t]);
      sol.w[p] += delta;
    }
    sol.epochs = epoch + 1;
    sol.max_violation = max_violation;
    if (max_violation < options.tol) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

double svm_primal_objective(const MatrixF& x, std::span<const std::int8_t> y, std::span<const double> w_aug,
                            double c) {
  double reg = 0.0;
  for (double v : w_aug) reg += v * v;
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) hinge += std::max(0.0, 1.0 - y[i] * augmented_dot(w_aug, x.row(i)));
  return 0.5 * reg + c * hinge;
}

double svm_dual_objective(const MatrixF& x, std::span<const std::int8_t> y, std::span<const double> alpha) {
  std::vector<double> w(x.cols() + 1, 0.0);
  double sum_alpha = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    sum_alpha += alpha[i];
    const double s = alpha[i] * y[i];
    for (std::size_t t = 0; t < x.cols(); ++t) w[t] += s * static_cast<double>(x(i, t));
    w[x.cols()] += s;
  }
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return sum_alpha - 0.5 * sq;
}

SvmModel svm_train_binary(const MatrixF& x, std::span<const std::int8_t> y, const SvmOptions& options) {
  options.validate();
  check_problem(x, y);
  SvmModel model;
  model.c = options.c;
  model.w.assign(x.cols(), 0.0f);

  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) {
    model.degenerate = true;
    model.b = has_pos ? 1.0f : -1.0f;
    return model;
  }

  const auto sol = svm_solve_dual(x, y, options);
  if (!sol.converged)
    log::warn("svm: stopped at max_iter=", options.max_iter, " with violation ", sol.max_violation);
  for (std::size_t t = 0; t < x.cols(); ++t) model.w[t] = static_cast<float>(sol.w[t]);
  model.b = static_cast<float>(sol.w[x.cols()]);
  model.n_sv_bounded = static_cast<std::size_t>(
      std::count_if(sol.alpha.begin(), sol.alpha.end(), [&](double a) { return a >= options.c; }));
  return model;
}

std::vector<double> svm_decision(const SvmModel& model, const MatrixF& x) {
  if (x.cols() != model.dim())
    throw DimensionMismatch("features have " + std::to_string(x.cols()) + " columns, model expects " +
                            std::to_string(model.dim()));
  std::vector<double> scores(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    const auto row = x.row(i);
    for (std::size_t t = 0; t < row.size(); ++t) s += static_cast<double>(row[t]) * model.w[t];
    scores[i] = s + static_cast<double>(model.b);
  }
  return scores;
}

OvrSvmModel svm_train_ovr(const MatrixF& x, const Matrix<std::uint8_t>& class_labels, const SvmOptions& options) {
  if (class_labels.rows() != x.rows())
    throw DimensionMismatch("class_labels has " + std::to_string(class_labels.rows()) + " rows, features have " +
                            std::to_string(x.rows()));
  options.validate();
  OvrSvmModel ovr;
  ovr.dim = x.cols();
  ovr.models.resize(class_labels.cols());
  const auto n_classes = static_cast<std::ptrdiff_t>(class_labels.cols());

  auto train_class = [&](std::size_t c) {
    std::vector<std::int8_t> y(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) y[i] = class_labels(i, c) ? 1 : -1;
    SvmOptions opts = options;
    opts.seed = options.seed + c;
    ovr.models[c] = svm_train_binary(x, y, opts);
    if (ovr.models[c].degenerate) log::warn("svm: class ", c, " has a single target value; degenerate model");
  };

  if (parallel::enabled() && n_classes > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(parallel::num_threads())
    for (std::ptrdiff_t c = 0; c < n_classes; ++c) train_class(static_cast<std::size_t>(c));
  } else {
    for (std::ptrdiff_t c = 0; c < n_classes; ++c) train_class(static_cast<std::size_t>(c));
  }
  return ovr;
}

void save_svm(const OvrSvmModel& model, const std::filesystem::path& path) {
  io::Writer w(kMagic, kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.n_classes()));
  w.put<std::uint64_t>(model.dim);
  for (const auto& m : model.models) {
    w.put_span(std::span<const float>(m.w));
    w.put<float>(m.b);
  }
  w.write_to(path);
}

OvrSvmModel load_svm(const std::filesystem::path& path) {
  io::Reader r(path, kMagic, kVersion);
  const auto n_classes = r.get<std::uint32_t>();
  const auto p = r.get<std::uint64_t>();
  if (static_cast<std::uint64_t>(n_classes) * (p + 1) * sizeof(float) != r.remaining())
    throw CorruptionError(r.source() + ": SVM payload does not match header");
  OvrSvmModel ovr;
  ovr.dim = p;
  ovr.models.resize(n_classes);
  for (auto& m : ovr.models) {
    m.w.resize(p);
    r.get_span(std::span<float>(m.w));
    m.b = r.get<float>();
    for (float v : m.w)
      if (!std::isfinite(v)) throw ValidationError(r.source() + ": SVM weights contain NaN/Inf");
    if (!std::isfinite(m.b)) throw ValidationError(r.source() + ": SVM bias is NaN/Inf");
  }
  return ovr;
}

}  // namespace udft
