#include "udft/transfer_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "udft/binary_io.hpp"
#include "udft/error.hpp"
#include "udft/kernels.hpp"
#include "udft/log.hpp"

namespace udft {
namespace {

constexpr char kMagic[] = "UTNP";
constexpr std::uint32_t kVersion = 1;

template <typename Real>
void check_input(const TransferNet<Real>& params, std::size_t cols) {
  if (cols != params.input_dim())
    throw DimensionMismatch("input has " + std::to_string(cols) + " columns, network expects " +
                            std::to_string(params.input_dim()));
}

void check_labels(std::size_t rows, std::span<const std::uint32_t> labels, std::size_t classes) {
  if (labels.size() != rows)
    throw DimensionMismatch(std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " rows");
  for (auto l : labels)
    if (l >= classes)
      throw InvalidArgument("label " + std::to_string(l) + " out of range for " + std::to_string(classes) +
                            " classes");
}

// softmax(logits) - onehot(labels), divided by the batch size.
template <typename Real>
Matrix<Real> logit_gradient(const Matrix<Real>& logits, std::span<const std::uint32_t> labels) {
  const std::size_t b = logits.rows(), c = logits.cols();
  Matrix<Real> g(b, c);
  std::vector<double> e(c);
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = logits.row(i);
    const double mx = static_cast<double>(*std::max_element(row.begin(), row.end()));
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      e[j] = std::exp(static_cast<double>(row[j]) - mx);
      sum += e[j];
    }
    for (std::size_t j = 0; j < c; ++j) {
      const double p = e[j] / sum - (j == labels[i] ? 1.0 : 0.0);
      g(i, j) = static_cast<Real>(p * inv_b);
    }
  }
  return g;
}

template <typename Real>
std::vector<Real> column_sums(const Matrix<Real>& m) {
  std::vector<double> acc(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) acc[j] += static_cast<double>(m(i, j));
  return std::vector<Real>(acc.begin(), acc.end());
}

MatrixF gather_rows(const MatrixF& x, std::span<const std::size_t> rows) {
  MatrixF out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(x.row(rows[i]).data(), x.cols(), out.row(i).data());
  return out;
}

}  // namespace

template <typename Real>
TransferNet<Real> TransferNet<Real>::zeros_like() const {
  TransferNet<Real> z;
  z.w1 = Matrix<Real>(w1.rows(), w1.cols());
  z.b1.assign(b1.size(), Real(0));
  z.w2 = Matrix<Real>(w2.rows(), w2.cols());
  z.b2.assign(b2.size(), Real(0));
  return z;
}

void SgdHyper::validate() const {
  if (!(lr0 > 0.0)) throw InvalidArgument("lr0 must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0,1)");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight_decay must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0,1]");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (step_size < 1) throw InvalidArgument("step_size must be >= 1");
}

double learning_rate(const SgdHyper& hyper, std::size_t iter) {
  return hyper.lr0 * std::pow(hyper.gamma, static_cast<double>(iter / hyper.step_size));
}

template <typename Real>
TransferNet<Real> init_network(std::size_t d, std::size_t n1, std::size_t n2, std::uint64_t seed) {
  if (d < 1 || n1 < 1 || n2 < 1) throw InvalidArgument("network dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  TransferNet<Real> net;
  net.w1 = Matrix<Real>(n1, d);
  net.b1.assign(n1, Real(0));
  net.w2 = Matrix<Real>(n2, n1);
  net.b2.assign(n2, Real(0));
  std::normal_distribution<double> n_w1(0.0, std::sqrt(2.0 / static_cast<double>(d)));
  for (auto& v : net.w1.values()) v = static_cast<Real>(n_w1(rng));
  std::normal_distribution<double> n_w2(0.0, std::sqrt(2.0 / static_cast<double>(n1)));
  for (auto& v : net.w2.values()) v = static_cast<Real>(n_w2(rng));
  return net;
}

template <typename Real>
Activations<Real> forward(const TransferNet<Real>& params, const Matrix<Real>& x) {
  check_input(params, x.cols());
  Activations<Real> a;
  a.hidden = Matrix<Real>(x.rows(), params.hidden_dim());
  kernels::affine_nt(x, params.w1, std::span<const Real>(params.b1), a.hidden);
  for (auto& v : a.hidden.values()) v = v > Real(0) ? v : Real(0);
  a.logits = Matrix<Real>(x.rows(), params.output_dim());
  kernels::affine_nt(a.hidden, params.w2, std::span<const Real>(params.b2), a.logits);
  return a;
}

template <typename Real>
double loss_softmax_ce(const Matrix<Real>& logits, std::span<const std::uint32_t> labels) {
  check_labels(logits.rows(), labels, logits.cols());
  if (logits.rows() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const double mx = static_cast<double>(*std::max_element(row.begin(), row.end()));
    double sum = 0.0;
    for (auto v : row) sum += std::exp(static_cast<double>(v) - mx);
    total += std::log(sum) - (static_cast<double>(row[labels[i]]) - mx);
  }
  return total / static_cast<double>(logits.rows());
}

template <typename Real>
TransferNet<Real> backward(const TransferNet<Real>& params, const Matrix<Real>& x,
                           const Activations<Real>& acts, std::span<const std::uint32_t> labels) {
  check_input(params, x.cols());
  check_labels(x.rows(), labels, params.output_dim());
  TransferNet<Real> g = params.zeros_like();
  if (x.rows() == 0) return g;

  const Matrix<Real> d_logits = logit_gradient(acts.logits, labels);
  g.b2 = column_sums(d_logits);
  kernels::gemm_tn(d_logits, acts.hidden, g.w2);

  Matrix<Real> d_hidden(x.rows(), params.hidden_dim());
  kernels::gemm_nn(d_logits, params.w2, d_hidden);
  // ReLU gate: no gradient where the unit was inactive
  for (std::size_t i = 0; i < d_hidden.size(); ++i)
    if (!(acts.hidden.data()[i] > Real(0))) d_hidden.data()[i] = Real(0);
  g.b1 = column_sums(d_hidden);
  kernels::gemm_tn(d_hidden, x, g.w1);
  return g;
}

template <typename Real>
TransferNet<Real> backward(const TransferNet<Real>& params, const Matrix<Real>& x,
                           std::span<const std::uint32_t> labels) {
  return backward(params, x, forward(params, x), labels);
}

template <typename Real>
void sgd_step(TransferNet<Real>& params, const TransferNet<Real>& grads, TransferNet<Real>& velocity,
              const SgdHyper& hyper, std::size_t iter) {
  const Real lr = static_cast<Real>(learning_rate(hyper, iter));
  const Real mom = static_cast<Real>(hyper.momentum);
  const Real wd = static_cast<Real>(hyper.weight_decay);
  auto update = [&](std::span<Real> p, std::span<const Real> g, std::span<Real> v) {
    if (p.size() != g.size() || p.size() != v.size()) throw DimensionMismatch("sgd_step shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = mom * v[i] - lr * (g[i] + wd * p[i]);
      p[i] = p[i] + v[i];
    }
  };
  update(params.w1.values(), grads.w1.values(), velocity.w1.values());
  update(params.b1, grads.b1, velocity.b1);
  update(params.w2.values(), grads.w2.values(), velocity.w2.values());
  update(params.b2, grads.b2, velocity.b2);
}

TrainResult train(const FeatureDataset& lr_features, const PseudoLabeling& pseudo, std::size_t n1,
                  std::size_t n2, const SgdHyper& hyper) {
  hyper.validate();
  if (n2 != pseudo.k)
    throw InvalidArgument("N2=" + std::to_string(n2) + " must equal the pseudo-class count k=" +
                          std::to_string(pseudo.k));
  const std::size_t n = lr_features.n();
  if (pseudo.labels.size() != n)
    throw DimensionMismatch(std::to_string(pseudo.labels.size()) + " pseudo-labels for " + std::to_string(n) +
                            " samples");
  if (n == 0 && hyper.total_iters > 0) throw InvalidArgument("cannot train on an empty dataset");

  TrainResult result;
  result.params = init_network<float>(lr_features.d(), n1, n2, hyper.seed);
  TransferNetParams velocity = result.params.zeros_like();

  // independent stream for the epoch permutations
  std::mt19937_64 shuffle_rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;
  std::vector<std::uint32_t> batch_labels;

  result.history.loss.reserve(hyper.total_iters);
  result.history.lr.reserve(hyper.total_iters);
  for (std::size_t iter = 0; iter < hyper.total_iters; ++iter) {
    if (cursor >= n) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      cursor = 0;
    }
    const std::size_t b = std::min(hyper.batch_size, n - cursor);
    const std::span<const std::size_t> rows(order.data() + cursor, b);
    cursor += b;

    const MatrixF batch = gather_rows(lr_features.data, rows);
    batch_labels.resize(b);
    for (std::size_t i = 0; i < b; ++i) batch_labels[i] = pseudo.labels[rows[i]];

    const auto acts = forward(result.params, batch);
    const double loss = loss_softmax_ce(acts.logits, batch_labels);
    if (!std::isfinite(loss)) throw DivergenceError("training diverged: non-finite loss at iteration " +
                                                    std::to_string(iter));
    const auto grads = backward(result.params, batch, acts, batch_labels);
    sgd_step(result.params, grads, velocity, hyper, iter);

    result.history.loss.push_back(loss);
    result.history.lr.push_back(learning_rate(hyper, iter));
    if ((iter + 1) % 1000 == 0) log::info("train-transfer: iter ", iter + 1, " loss ", loss);
  }
  result.history.final_loss = result.history.loss.empty() ? 0.0 : result.history.loss.back();
  return result;
}

MatrixF transform(const TransferNetParams& params, const MatrixF& x) {
  return forward(params, x).logits;
}

double accuracy(const TransferNetParams& params, const MatrixF& x, std::span<const std::uint32_t> labels) {
  check_labels(x.rows(), labels, params.output_dim());
  if (x.rows() == 0) return 0.0;
  const MatrixF logits = transform(params, x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const auto arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (arg == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

void save_checkpoint(const TransferNetParams& params, const std::filesystem::path& path) {
  io::Writer w(kMagic, kVersion);
  w.put<std::uint64_t>(params.input_dim());
  w.put<std::uint64_t>(params.hidden_dim());
  w.put<std::uint64_t>(params.output_dim());
  params.for_each_tensor([&](std::span<const float> t) { w.put_span(t); });
  w.write_to(path);
}

TransferNetParams load_checkpoint(const std::filesystem::path& path) {
  io::Reader r(path, kMagic, kVersion);
  const auto d = r.get<std::uint64_t>();
  const auto n1 = r.get<std::uint64_t>();
  const auto n2 = r.get<std::uint64_t>();
  const std::uint64_t count = n1 * d + n1 + n2 * n1 + n2;
  if (count * sizeof(float) != r.remaining())
    throw CorruptionError(r.source() + ": checkpoint payload does not match dims (" + std::to_string(d) + "," +
                          std::to_string(n1) + "," + std::to_string(n2) + ")");
  TransferNetParams p;
  p.w1 = MatrixF(n1, d);
  p.b1.resize(n1);
  p.w2 = MatrixF(n2, n1);
  p.b2.resize(n2);
  p.for_each_tensor([&](std::span<float> t) { r.get_span(t); });
  p.for_each_tensor([&](std::span<const float> t) {
    for (float v : t)
      if (!std::isfinite(v)) throw ValidationError(r.source() + ": checkpoint contains NaN/Inf");
  });
  return p;
}

#define UDFT_INSTANTIATE(Real)                                                                           \
  template struct TransferNet<Real>;                                                                     \
  template TransferNet<Real> init_network<Real>(std::size_t, std::size_t, std::size_t, std::uint64_t);   \
  template Activations<Real> forward<Real>(const TransferNet<Real>&, const Matrix<Real>&);               \
  template double loss_softmax_ce<Real>(const Matrix<Real>&, std::span<const std::uint32_t>);            \
  template TransferNet<Real> backward<Real>(const TransferNet<Real>&, const Matrix<Real>&,               \
                                            std::span<const std::uint32_t>);                             \
  template TransferNet<Real> backward<Real>(const TransferNet<Real>&, const Matrix<Real>&,               \
                                            const Activations<Real>&, std::span<const std::uint32_t>);   \
  template void sgd_step<Real>(TransferNet<Real>&, const TransferNet<Real>&, TransferNet<Real>&,         \
                               const SgdHyper&, std::size_t);

UDFT_INSTANTIATE(float)
UDFT_INSTANTIATE(double)

#undef UDFT_INSTANTIATE

}  // namespace udft
