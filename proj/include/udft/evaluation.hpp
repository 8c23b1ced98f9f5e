#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "udft/matrix.hpp"
#include "udft/svm.hpp"

namespace udft {

enum class ApMode { voc11, continuous };

const char* to_string(ApMode mode);
/// Throws InvalidArgument for anything but "voc11" / "continuous".
ApMode parse_ap_mode(const std::string& text);

/// Average precision of `scores` against binary `labels`. Samples are ranked by
/// descending score, ties keeping input order.
///   voc11:      mean over recall r in {0, 0.1, ..., 1} of the max precision at recall >= r
///   continuous: area under the precision envelope, i.e. (1/P) Σ over positives of the
///               max precision at or beyond that positive's rank
/// Throws InvalidArgument when there are no positives.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels,
                         ApMode mode = ApMode::voc11);

/// Arithmetic mean; InvalidArgument when empty.
double mean_average_precision(std::span<const double> per_class_ap);

struct EvalReport {
  std::vector<std::string> class_names;
  /// Fraction in [0,1]; nullopt for classes without test positives (omitted from mAP).
  std::vector<std::optional<double>> per_class_ap;
  double map = 0.0;
  ApMode ap_mode = ApMode::voc11;
  /// Resolved configuration echoed verbatim, in insertion order.
  std::vector<std::pair<std::string, std::string>> run_config;

  std::vector<std::size_t> omitted() const;
};

/// Per-class AP of each OVR model's scores on `features`. Class names default to c0, c1, ...
EvalReport evaluate(const OvrSvmModel& models, const MatrixF& features, const Matrix<std::uint8_t>& class_labels,
                    ApMode mode, std::vector<std::string> class_names = {});

/// Aligned table: one column per class plus mAP, values in percent with one decimal.
std::string render_report_table(const EvalReport& report, const std::string& row_label = "result");

/// key=value text: config.* echo, ap_mode, ap.<class>, map. Full precision; deterministic.
std::string render_report_kv(const EvalReport& report);

}  // namespace udft
