#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "udft/matrix.hpp"

namespace udft {

/// n x d feature vectors (one row per sample) with optional multi-label ground truth and
/// optional cluster pseudo-labels. Treated as immutable once built; share freely.
struct FeatureDataset {
  MatrixF data;
  /// n x n_classes, entries 0/1. An image may belong to several classes.
  std::optional<Matrix<std::uint8_t>> class_labels;
  std::optional<std::vector<std::uint32_t>> pseudo_labels;
  /// Cluster count in effect when pseudo_labels were assigned.
  std::optional<std::uint32_t> pseudo_k;

  std::size_t n() const { return data.rows(); }
  std::size_t d() const { return data.cols(); }
  std::size_t n_classes() const { return class_labels ? class_labels->cols() : 0; }

  /// Throws ValidationError on NaN/Inf, non-binary labels, pseudo-labels >= pseudo_k
  /// or shape disagreements.
  void validate() const;

  bool operator==(const FeatureDataset&) const = default;
};

enum class FileFormat { binary, csv };

inline constexpr char kFeatureMagic[] = "UDFT";
inline constexpr std::uint32_t kFeatureVersion = 1;

namespace feature_flags {
inline constexpr std::uint32_t class_labels = 1u << 0;
inline constexpr std::uint32_t pseudo_labels = 1u << 1;
inline constexpr std::uint32_t pseudo_k = 1u << 2;
}  // namespace feature_flags

/// Size of the binary header: magic, version, n, d, n_classes, flags.
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 4 + 8 + 8 + 4 + 4;

FeatureDataset load_features(const std::filesystem::path& path, FileFormat format = FileFormat::binary);
void save_features(const FeatureDataset& dataset, const std::filesystem::path& path,
                   FileFormat format = FileFormat::binary);

/// Format from extension: ".csv" selects CSV, anything else the binary container.
FileFormat format_for(const std::filesystem::path& path);

FeatureDataset select_rows(const FeatureDataset& dataset, std::span<const std::size_t> rows);

/// Random disjoint partition into (train, test). Each part keeps the original row order,
/// so two paired datasets of equal n split with the same seed stay paired.
std::pair<FeatureDataset, FeatureDataset> split(const FeatureDataset& dataset, double train_fraction,
                                                std::uint64_t seed);

/// Scale every row to unit L2 norm (zero rows are left as is).
void l2_normalize(FeatureDataset& dataset);

struct SyntheticConfig {
  std::size_t n_clusters = 5;
  std::size_t n_per_cluster = 200;
  std::size_t d = 64;
  /// Pairwise distance between class means, in units of the within-class std (1).
  double hr_separation = 8.0;
  double lr_noise_sigma = 2.0;
  std::size_t lr_rank = 16;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticPair {
  FeatureDataset hr;
  FeatureDataset lr;
};

/// HR rows come from isotropic unit-variance Gaussians around class means placed on
/// mutually orthogonal directions. The LR row i is HR row i projected onto a fixed random
/// lr_rank-dimensional subspace plus N(0, lr_noise_sigma^2) noise. Rows are paired and
/// both views carry one-hot class labels.
SyntheticPair generate_synthetic(const SyntheticConfig& config);

}  // namespace udft
