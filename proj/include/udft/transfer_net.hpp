#pragma once

// Two fully connected layers d -> N1 -> N2 with ReLU in between, trained with softmax
// cross-entropy against pseudo-labels. Layer-2 outputs (pre-softmax) are the transferred
// features. Parameters are templated on precision: float for training and checkpoints,
// double for gradient checking.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "udft/feature_store.hpp"
#include "udft/matrix.hpp"
#include "udft/pseudo_label.hpp"

namespace udft {

template <typename Real>
struct TransferNet {
  Matrix<Real> w1;  // N1 x d
  std::vector<Real> b1;
  Matrix<Real> w2;  // N2 x N1
  std::vector<Real> b2;

  std::size_t input_dim() const { return w1.cols(); }
  std::size_t hidden_dim() const { return w1.rows(); }
  std::size_t output_dim() const { return w2.rows(); }
  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  /// Same shapes, all zeros.
  TransferNet zeros_like() const;

  /// Visit (w1, b1, w2, b2) as flat spans in declared order.
  template <typename F>
  void for_each_tensor(F&& f) {
    f(w1.values());
    f(std::span<Real>(b1));
    f(w2.values());
    f(std::span<Real>(b2));
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(w1.values());
    f(std::span<const Real>(b1));
    f(w2.values());
    f(std::span<const Real>(b2));
  }

  bool operator==(const TransferNet&) const = default;
};

using TransferNetParams = TransferNet<float>;

template <typename Real>
struct Activations {
  Matrix<Real> hidden;  // b x N1, post-ReLU
  Matrix<Real> logits;  // b x N2
};

struct SgdHyper {
  double lr0 = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::size_t batch_size = 1000;
  std::size_t step_size = 15000;
  double gamma = 0.1;
  std::size_t total_iters = 31561;
  std::uint64_t seed = 0;

  void validate() const;
};

/// lr0 * gamma^floor(iter / step_size)
double learning_rate(const SgdHyper& hyper, std::size_t iter);

struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> lr;
  double final_loss = 0.0;
};

struct TrainResult {
  TransferNetParams params;
  TrainHistory history;
};

/// MSRA (He) fan-in init: W1 ~ N(0, 2/d), W2 ~ N(0, 2/N1), zero biases.
template <typename Real = float>
TransferNet<Real> init_network(std::size_t d, std::size_t n1, std::size_t n2, std::uint64_t seed);

template <typename Real>
Activations<Real> forward(const TransferNet<Real>& params, const Matrix<Real>& x);

/// Mean of -log softmax(logits)[label], evaluated in double with max subtraction.
template <typename Real>
double loss_softmax_ce(const Matrix<Real>& logits, std::span<const std::uint32_t> labels);

/// Analytic gradients of loss_softmax_ce(forward(params, x).logits, labels).
template <typename Real>
TransferNet<Real> backward(const TransferNet<Real>& params, const Matrix<Real>& x,
                           std::span<const std::uint32_t> labels);

/// Same, reusing a forward pass already computed for `x`.
template <typename Real>
TransferNet<Real> backward(const TransferNet<Real>& params, const Matrix<Real>& x,
                           const Activations<Real>& acts, std::span<const std::uint32_t> labels);

/// v <- momentum * v - lr(iter) * (g + weight_decay * p);  p <- p + v
template <typename Real>
void sgd_step(TransferNet<Real>& params, const TransferNet<Real>& grads, TransferNet<Real>& velocity,
              const SgdHyper& hyper, std::size_t iter);

/// Mini-batch SGD over `lr_features` against `pseudo`. Reshuffles each epoch; the last
/// batch of an epoch may be short. Throws DivergenceError on a non-finite loss.
TrainResult train(const FeatureDataset& lr_features, const PseudoLabeling& pseudo, std::size_t n1,
                  std::size_t n2, const SgdHyper& hyper);

/// Layer-2 outputs for every row of `x`: the transferred features.
MatrixF transform(const TransferNetParams& params, const MatrixF& x);

/// Fraction of rows whose arg-max logit equals the label.
double accuracy(const TransferNetParams& params, const MatrixF& x, std::span<const std::uint32_t> labels);

/// "UTNP" checkpoint: version, d u64, N1 u64, N2 u64, then W1, b1, W2, b2 as float32.
void save_checkpoint(const TransferNetParams& params, const std::filesystem::path& path);
TransferNetParams load_checkpoint(const std::filesystem::path& path);

}  // namespace udft
