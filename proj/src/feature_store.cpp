#include "udft/feature_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "udft/binary_io.hpp"
#include "udft/error.hpp"

namespace udft {

void FeatureDataset::validate() const {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data.data()[i]))
      throw ValidationError("feature data contains NaN/Inf at row " + std::to_string(i / data.cols()) +
                            ", column " + std::to_string(i % data.cols()));
  }
  if (class_labels) {
    if (class_labels->rows() != n())
      throw ValidationError("class_labels has " + std::to_string(class_labels->rows()) + " rows, expected " +
                            std::to_string(n()));
    for (auto v : class_labels->values())
      if (v > 1) throw ValidationError("class_labels entry outside {0,1}");
  }
  if (pseudo_labels) {
    if (pseudo_labels->size() != n())
      throw ValidationError("pseudo_labels has " + std::to_string(pseudo_labels->size()) +
                            " entries, expected " + std::to_string(n()));
    if (pseudo_k) {
      for (auto v : *pseudo_labels)
        if (v >= *pseudo_k)
          throw ValidationError("pseudo-label " + std::to_string(v) + " >= k=" + std::to_string(*pseudo_k));
    }
  }
}

FileFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::csv : FileFormat::binary;
}

namespace {

void save_binary(const FeatureDataset& ds, const std::filesystem::path& path) {
  io::Writer w(kFeatureMagic, kFeatureVersion);
  std::uint32_t flags = 0;
  if (ds.class_labels) flags |= feature_flags::class_labels;
  if (ds.pseudo_labels) flags |= feature_flags::pseudo_labels;
  if (ds.pseudo_k) flags |= feature_flags::pseudo_k;
  w.put<std::uint64_t>(ds.n());
  w.put<std::uint64_t>(ds.d());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.n_classes()));
  w.put<std::uint32_t>(flags);
  w.put_span(ds.data.values());
  if (ds.class_labels) w.put_span(ds.class_labels->values());
  if (ds.pseudo_labels) w.put_span(std::span<const std::uint32_t>(*ds.pseudo_labels));
  if (ds.pseudo_k) w.put<std::uint32_t>(*ds.pseudo_k);
  w.write_to(path);
}

FeatureDataset load_binary(const std::filesystem::path& path) {
  io::Reader r(path, kFeatureMagic, kFeatureVersion);
  const auto n = r.get<std::uint64_t>();
  const auto d = r.get<std::uint64_t>();
  const auto n_classes = r.get<std::uint32_t>();
  const auto flags = r.get<std::uint32_t>();
  constexpr std::uint64_t kMax = 0x7fffffff;
  if (n > kMax || d > kMax) throw FormatError(r.source() + ": n or d exceeds 2^31-1");
  if (flags & ~(feature_flags::class_labels | feature_flags::pseudo_labels | feature_flags::pseudo_k))
    throw FormatError(r.source() + ": unknown flag bits");
  if (n * d * sizeof(float) > r.remaining())
    throw CorruptionError(r.source() + ": header declares " + std::to_string(n) + "x" + std::to_string(d) +
                          " floats but the payload is shorter");

  FeatureDataset ds;
  ds.data = MatrixF(n, d);
  r.get_span(ds.data.values());
  if (flags & feature_flags::class_labels) {
    ds.class_labels = Matrix<std::uint8_t>(n, n_classes);
    r.get_span(ds.class_labels->values());
  } else if (n_classes != 0) {
    throw FormatError(r.source() + ": n_classes set without class-label flag");
  }
  if (flags & feature_flags::pseudo_labels) {
    ds.pseudo_labels = std::vector<std::uint32_t>(n);
    r.get_span(std::span<std::uint32_t>(*ds.pseudo_labels));
  }
  if (flags & feature_flags::pseudo_k) ds.pseudo_k = r.get<std::uint32_t>();
  r.expect_end();
  ds.validate();
  return ds;
}

std::string format_float(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void save_csv(const FeatureDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (std::size_t j = 0; j < ds.d(); ++j) out << (j ? "," : "") << 'f' << j;
  for (std::size_t c = 0; c < ds.n_classes(); ++c) out << ",c" << c;
  out << '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.d(); ++j) out << (j ? "," : "") << format_float(ds.data(i, j));
    for (std::size_t c = 0; c < ds.n_classes(); ++c) out << ',' << int((*ds.class_labels)(i, c));
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

FeatureDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  std::size_t d = 0, n_classes = 0;
  for (const auto& h : header) {
    const bool feature = h == "f" + std::to_string(d);
    const bool label = h == "c" + std::to_string(n_classes);
    if (feature && n_classes == 0) ++d;
    else if (label) ++n_classes;
    else throw FormatError(path.string() + ": unexpected CSV header column '" + h + "'");
  }
  if (d == 0) throw FormatError(path.string() + ": CSV header has no feature columns");

  std::vector<float> values;
  std::vector<std::uint8_t> labels;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != d + n_classes)
      throw CorruptionError(path.string() + ": row " + std::to_string(n) + " has " +
                            std::to_string(fields.size()) + " fields, expected " + std::to_string(d + n_classes));
    for (std::size_t j = 0; j < d; ++j) {
      float v = 0;
      const auto& f = fields[j];
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw FormatError(path.string() + ": bad number '" + f + "' in row " + std::to_string(n));
      values.push_back(v);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      const auto& f = fields[d + c];
      if (f != "0" && f != "1") throw ValidationError(path.string() + ": class label '" + f + "' not in {0,1}");
      labels.push_back(f == "1" ? 1 : 0);
    }
    ++n;
  }
  FeatureDataset ds;
  ds.data = MatrixF(n, d, std::move(values));
  if (n_classes > 0) ds.class_labels = Matrix<std::uint8_t>(n, n_classes, std::move(labels));
  ds.validate();
  return ds;
}

// Gram-Schmidt on Gaussian draws: `count` orthonormal vectors in R^d (count <= d).
std::vector<std::vector<double>> random_orthonormal(std::size_t count, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    std::vector<double> v(d);
    for (auto& x : v) x = normal(rng);
    for (const auto& b : basis) {
      const double dot = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
      for (std::size_t t = 0; t < d; ++t) v[t] -= dot * b[t];
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm < 1e-8) continue;
    for (auto& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

FeatureDataset load_features(const std::filesystem::path& path, FileFormat format) {
  return format == FileFormat::csv ? load_csv(path) : load_binary(path);
}

void save_features(const FeatureDataset& dataset, const std::filesystem::path& path, FileFormat format) {
  dataset.validate();
  if (format == FileFormat::csv) save_csv(dataset, path);
  else save_binary(dataset, path);
}

FeatureDataset select_rows(const FeatureDataset& ds, std::span<const std::size_t> rows) {
  FeatureDataset out;
  out.data = MatrixF(rows.size(), ds.d());
  if (ds.class_labels) out.class_labels = Matrix<std::uint8_t>(rows.size(), ds.n_classes());
  if (ds.pseudo_labels) out.pseudo_labels = std::vector<std::uint32_t>(rows.size());
  out.pseudo_k = ds.pseudo_k;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = rows[i];
    std::copy_n(ds.data.row(src).data(), ds.d(), out.data.row(i).data());
    if (ds.class_labels)
      std::copy_n(ds.class_labels->row(src).data(), ds.n_classes(), out.class_labels->row(i).data());
    if (ds.pseudo_labels) (*out.pseudo_labels)[i] = (*ds.pseudo_labels)[src];
  }
  return out;
}

std::pair<FeatureDataset, FeatureDataset> split(const FeatureDataset& dataset, double train_fraction,
                                                std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train_fraction must lie in (0,1), got " + std::to_string(train_fraction));
  const std::size_t n = dataset.n();
  if (n < 2) throw InvalidArgument("split needs at least 2 samples");
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {select_rows(dataset, train), select_rows(dataset, test)};
}

void l2_normalize(FeatureDataset& dataset) {
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    auto row = dataset.data.row(i);
    double s = 0.0;
    for (float v : row) s += static_cast<double>(v) * v;
    if (s == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (auto& v : row) v = static_cast<float>(v * inv);
  }
}

void SyntheticConfig::validate() const {
  if (n_clusters < 1 || n_per_cluster < 1 || d < 1) throw InvalidArgument("synthetic counts must be >= 1");
  if (lr_rank < 1 || lr_rank > d) throw InvalidArgument("lr_rank must lie in [1, d]");
  if (!(lr_noise_sigma >= 0.0)) throw InvalidArgument("lr_noise_sigma must be >= 0");
  if (!(hr_separation >= 0.0)) throw InvalidArgument("hr_separation must be >= 0");
}

SyntheticPair generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const std::size_t k = config.n_clusters, d = config.d, n = k * config.n_per_cluster;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Class means at (separation / sqrt 2) * u_c for orthonormal u_c: pairwise distance is
  // exactly hr_separation. With more classes than dimensions fall back to random unit vectors.
  std::vector<std::vector<double>> means;
  if (k <= d) {
    means = random_orthonormal(k, d, rng);
  } else {
    for (std::size_t c = 0; c < k; ++c) means.push_back(random_orthonormal(1, d, rng).front());
  }
  const double scale = config.hr_separation / std::sqrt(2.0);
  for (auto& m : means)
    for (auto& v : m) v *= scale;

  SyntheticPair out;
  out.hr.data = MatrixF(n, d);
  Matrix<std::uint8_t> labels(n, k, 0);
  MatrixD hr_exact(n, d);
  for (std::size_t c = 0, i = 0; c < k; ++c) {
    for (std::size_t s = 0; s < config.n_per_cluster; ++s, ++i) {
      for (std::size_t t = 0; t < d; ++t) {
        const double v = means[c][t] + normal(rng);
        out.hr.data(i, t) = static_cast<float>(v);
        hr_exact(i, t) = static_cast<double>(out.hr.data(i, t));
      }
      labels(i, c) = 1;
    }
  }
  out.hr.class_labels = labels;

  // Degradation: fixed rank-r orthogonal projector Q Q^T, then additive noise. The basis is
  // drawn even when r == d so the noise stream does not depend on the rank.
  const auto basis = random_orthonormal(config.lr_rank, d, rng);
  out.lr.data = out.hr.data;
  out.lr.class_labels = labels;
  const bool project = config.lr_rank < d;
  const bool noisy = config.lr_noise_sigma > 0.0;
  if (project || noisy) {
    std::vector<double> coeff(config.lr_rank);
    for (std::size_t i = 0; i < n; ++i) {
      auto x = hr_exact.row(i);
      std::vector<double> y(x.begin(), x.end());
      if (project) {
        for (std::size_t r = 0; r < config.lr_rank; ++r)
          coeff[r] = std::inner_product(x.begin(), x.end(), basis[r].begin(), 0.0);
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t r = 0; r < config.lr_rank; ++r)
          for (std::size_t t = 0; t < d; ++t) y[t] += coeff[r] * basis[r][t];
      }
      if (noisy)
        for (auto& v : y) v += config.lr_noise_sigma * normal(rng);
      for (std::size_t t = 0; t < d; ++t) out.lr.data(i, t) = static_cast<float>(y[t]);
    }
  }
  return out;
}

}  // namespace udft
