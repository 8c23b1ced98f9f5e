#include "udft/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "udft/error.hpp"
#include "udft/log.hpp"

namespace udft {
namespace {

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(ApMode mode) { return mode == ApMode::voc11 ? "voc11" : "continuous"; }

ApMode parse_ap_mode(const std::string& text) {
  if (text == "voc11") return ApMode::voc11;
  if (text == "continuous") return ApMode::continuous;
  throw InvalidArgument("unknown ap_mode '" + text + "' (expected voc11 or continuous)");
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels, ApMode mode) {
  if (scores.size() != labels.size())
    throw DimensionMismatch(std::to_string(scores.size()) + " scores for " + std::to_string(labels.size()) +
                            " labels");
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // precision and cumulative true positives after each rank
  std::vector<double> precision(m);
  std::vector<std::size_t> tp(m);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < m; ++r) {
    if (labels[order[r]]) ++hits;
    tp[r] = hits;
    precision[r] = static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  const std::size_t positives = hits;
  if (positives == 0) throw InvalidArgument("average precision undefined: no positive labels");

  // envelope[r] = max precision at rank >= r
  std::vector<double> envelope(precision);
  for (std::size_t r = m; r-- > 1;) envelope[r - 1] = std::max(envelope[r - 1], envelope[r]);

  if (mode == ApMode::continuous) {
    double sum = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      if (labels[order[r]]) sum += envelope[r];
    return sum / static_cast<double>(positives);
  }

  // 11-point: recall >= t/10 is tested exactly as 10 * tp >= t * P
  double sum = 0.0;
  std::size_t r = 0;
  for (std::size_t t = 0; t <= 10; ++t) {
    while (r < m && 10 * tp[r] < t * positives) ++r;
    sum += r < m ? envelope[r] : 0.0;
  }
  return sum / 11.0;
}

double mean_average_precision(std::span<const double> per_class_ap) {
  if (per_class_ap.empty()) throw InvalidArgument("mAP of an empty class set");
  double s = 0.0;
  for (double v : per_class_ap) s += v;
  return s / static_cast<double>(per_class_ap.size());
}

std::vector<std::size_t> EvalReport::omitted() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < per_class_ap.size(); ++c)
    if (!per_class_ap[c]) out.push_back(c);
  return out;
}

EvalReport evaluate(const OvrSvmModel& models, const MatrixF& features, const Matrix<std::uint8_t>& class_labels,
                    ApMode mode, std::vector<std::string> class_names) {
  if (class_labels.rows() != features.rows())
    throw DimensionMismatch("class_labels has " + std::to_string(class_labels.rows()) + " rows, features have " +
                            std::to_string(features.rows()));
  if (class_labels.cols() != models.n_classes())
    throw DimensionMismatch(std::to_string(models.n_classes()) + " models for " +
                            std::to_string(class_labels.cols()) + " label columns");
  const std::size_t n_classes = models.n_classes();
  if (class_names.empty())
    for (std::size_t c = 0; c < n_classes; ++c) class_names.push_back("c" + std::to_string(c));
  if (class_names.size() != n_classes)
    throw InvalidArgument(std::to_string(class_names.size()) + " class names for " + std::to_string(n_classes) +
                          " classes");

  EvalReport report;
  report.class_names = std::move(class_names);
  report.ap_mode = mode;
  report.per_class_ap.resize(n_classes);
  std::vector<double> kept;
  std::vector<std::uint8_t> labels(features.rows());
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < features.rows(); ++i) labels[i] = class_labels(i, c);
    if (std::find(labels.begin(), labels.end(), 1) == labels.end()) {
      log::warn("evaluate: class ", report.class_names[c], " has no positives; omitted from mAP");
      continue;
    }
    const auto scores = svm_decision(models.models[c], features);
    const double ap = average_precision(scores, labels, mode);
    report.per_class_ap[c] = ap;
    kept.push_back(ap);
  }
  if (kept.empty()) throw InvalidArgument("evaluate: no class has a positive test sample");
  report.map = mean_average_precision(kept);
  return report;
}

std::string render_report_table(const EvalReport& report, const std::string& row_label) {
  std::vector<std::string> header{""}, row{row_label};
  for (std::size_t c = 0; c < report.class_names.size(); ++c) {
    header.push_back(report.class_names[c]);
    if (report.per_class_ap[c]) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.1f", *report.per_class_ap[c] * 100.0);
      row.emplace_back(buf);
    } else {
      row.emplace_back("-");
    }
  }
  header.emplace_back("mAP");
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", report.map * 100.0);
  row.emplace_back(buf);

  std::ostringstream os;
  for (const auto* line : {&header, &row}) {
    os << '|';
    for (std::size_t j = 0; j < line->size(); ++j) {
      const std::size_t width = std::max(header[j].size(), row[j].size());
      const auto& cell = (*line)[j];
      os << ' ' << std::string(width - cell.size(), ' ') << cell << " |";
    }
    os << '\n';
  }
  return os.str();
}

std::string render_report_kv(const EvalReport& report) {
  std::ostringstream os;
  for (const auto& [k, v] : report.run_config) os << "config." << k << '=' << v << '\n';
  os << "ap_mode=" << to_string(report.ap_mode) << '\n';
  for (std::size_t c = 0; c < report.class_names.size(); ++c) {
    os << "ap." << report.class_names[c] << '=';
    if (report.per_class_ap[c]) os << full_precision(*report.per_class_ap[c]);
    else os << "omitted";
    os << '\n';
  }
  os << "map=" << full_precision(report.map) << '\n';
  return os.str();
}

}  // namespace udft
