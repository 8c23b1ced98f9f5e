#pragma once

#include <cstdint>
#include <vector>

#include "udft/clustering.hpp"
#include "udft/feature_store.hpp"

namespace udft {

/// Hard cluster assignments used as surrogate class labels.
struct PseudoLabeling {
  std::vector<std::uint32_t> labels;
  std::uint32_t k = 0;
  std::vector<std::size_t> histogram;
};

/// Label each LR row with its nearest HR centroid (lowest index on ties).
PseudoLabeling assign_pseudo_labels(const KMeansModel& model, const FeatureDataset& lr);

/// Same, and store the labels (plus k) into `lr`.
PseudoLabeling assign_pseudo_labels_into(const KMeansModel& model, FeatureDataset& lr);

/// Rebuild the labeling carried inside a dataset. Throws ValidationError when the
/// dataset has no pseudo-labels or no recorded k.
PseudoLabeling pseudo_labeling_of(const FeatureDataset& dataset);

}  // namespace udft
