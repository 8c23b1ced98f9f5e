#include "udft/pseudo_label.hpp"

#include <string>

#include "udft/error.hpp"

namespace udft {
namespace {

PseudoLabeling make_labeling(std::vector<std::uint32_t> labels, std::uint32_t k) {
  PseudoLabeling out;
  out.k = k;
  out.histogram.assign(k, 0);
  for (auto l : labels) {
    if (l >= k) throw ValidationError("pseudo-label " + std::to_string(l) + " >= k=" + std::to_string(k));
    ++out.histogram[l];
  }
  out.labels = std::move(labels);
  return out;
}

}  // namespace

PseudoLabeling assign_pseudo_labels(const KMeansModel& model, const FeatureDataset& lr) {
  if (lr.d() != model.dim())
    throw DimensionMismatch("LR features have d=" + std::to_string(lr.d()) + ", centroids have d=" +
                            std::to_string(model.dim()));
  return make_labeling(kmeans_assign(model, lr.data), static_cast<std::uint32_t>(model.k()));
}

PseudoLabeling assign_pseudo_labels_into(const KMeansModel& model, FeatureDataset& lr) {
  auto labeling = assign_pseudo_labels(model, lr);
  lr.pseudo_labels = labeling.labels;
  lr.pseudo_k = labeling.k;
  return labeling;
}

PseudoLabeling pseudo_labeling_of(const FeatureDataset& dataset) {
  if (!dataset.pseudo_labels || !dataset.pseudo_k)
    throw ValidationError("dataset carries no pseudo-labels with recorded k");
  return make_labeling(*dataset.pseudo_labels, *dataset.pseudo_k);
}

}  // namespace udft
