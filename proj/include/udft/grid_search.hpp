#pragma once

#include <optional>
#include <string>
#include <vector>

#include "udft/config.hpp"
#include "udft/feature_store.hpp"

namespace udft {

struct GridSpec {
  std::vector<std::size_t> n1_values;
  /// Each N2 also sets the cluster count k for its cells.
  std::vector<std::size_t> n2_values;
  PipelineConfig base_config;
  /// Run cells concurrently (kernels inside a cell then run serially).
  bool parallel_cells = false;

  void validate() const;
};

struct GridCell {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::optional<double> map;
  std::string error;
  double seconds = 0.0;
};

struct GridResult {
  /// Sorted by (n1, n2).
  std::vector<GridCell> cells;
  /// Index into cells of the highest mAP (ties: smaller N1, then smaller N2); nullopt if
  /// every cell failed.
  std::optional<std::size_t> best;

  const GridCell* find(std::size_t n1, std::size_t n2) const;
};

/// For each (N1, N2): k-means with k = N2 on HR, pseudo-label LR train, train the transfer
/// net, OVR SVM on transferred LR train, mAP on transferred LR test. Clusterings are cached
/// per distinct N2. A failing cell records its error and the sweep continues.
GridResult run_grid(const GridSpec& spec, const FeatureDataset& hr, const FeatureDataset& lr_train,
                    const FeatureDataset& lr_test);

/// Rows are N2 values, columns N1 values; the best cell is marked with '*'.
std::string render_grid(const GridResult& result);

/// One line per cell: "n1,n2,map,seconds" (map is ERR for failed cells).
std::string render_grid_records(const GridResult& result);

}  // namespace udft
