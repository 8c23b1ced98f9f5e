#include "udft/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "udft/error.hpp"

namespace udft {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw InvalidArgument("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos == v.size()) return out;
  } catch (...) {
  }
  throw InvalidArgument("config key '" + key + "': expected a number, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "hr_train", "hr_test", "lr_train", "lr_test", "out_dir", "k", "n1", "n2", "kmeans_max_iter", "kmeans_tol",
      "lr0", "momentum", "weight_decay", "batch_size", "step_size", "gamma", "total_iters", "svm_c", "svm_tol",
      "svm_max_iter", "ap_mode", "normalize", "seed", "threads", "class_names"};
  return keys;
}

void PipelineConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "hr_train") hr_train = v;
  else if (key == "hr_test") hr_test = v;
  else if (key == "lr_train") lr_train = v;
  else if (key == "lr_test") lr_test = v;
  else if (key == "out_dir") out_dir = v;
  else if (key == "k" || key == "n2") k = parse_uint(key, v);
  else if (key == "n1") n1 = parse_uint(key, v);
  else if (key == "kmeans_max_iter") kmeans.max_iter = parse_uint(key, v);
  else if (key == "kmeans_tol") kmeans.tol = parse_real(key, v);
  else if (key == "lr0") sgd.lr0 = parse_real(key, v);
  else if (key == "momentum") sgd.momentum = parse_real(key, v);
  else if (key == "weight_decay") sgd.weight_decay = parse_real(key, v);
  else if (key == "batch_size") sgd.batch_size = parse_uint(key, v);
  else if (key == "step_size") sgd.step_size = parse_uint(key, v);
  else if (key == "gamma") sgd.gamma = parse_real(key, v);
  else if (key == "total_iters") sgd.total_iters = parse_uint(key, v);
  else if (key == "svm_c") svm.c = parse_real(key, v);
  else if (key == "svm_tol") svm.tol = parse_real(key, v);
  else if (key == "svm_max_iter") svm.max_iter = parse_uint(key, v);
  else if (key == "ap_mode") ap_mode = parse_ap_mode(v);
  else if (key == "normalize") {
    if (v == "none") normalize = Normalize::none;
    else if (v == "l2") normalize = Normalize::l2;
    else throw InvalidArgument("config key 'normalize': expected none or l2, got '" + v + "'");
  } else if (key == "seed") seed = parse_uint(key, v);
  else if (key == "threads") threads = static_cast<int>(parse_uint(key, v));
  else if (key == "class_names") {
    class_names.clear();
    std::istringstream is(v);
    std::string name;
    while (std::getline(is, name, ','))
      if (!trim(name).empty()) class_names.push_back(trim(name));
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

void PipelineConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::resolved() const {
  return {
      {"hr_train", hr_train.string()},
      {"hr_test", hr_test.string()},
      {"lr_train", lr_train.string()},
      {"lr_test", lr_test.string()},
      {"out_dir", out_dir.string()},
      {"k", std::to_string(k)},
      {"n1", std::to_string(n1)},
      {"n2", std::to_string(n2())},
      {"kmeans_max_iter", std::to_string(kmeans.max_iter)},
      {"kmeans_tol", real_text(kmeans.tol)},
      {"lr0", real_text(sgd.lr0)},
      {"momentum", real_text(sgd.momentum)},
      {"weight_decay", real_text(sgd.weight_decay)},
      {"batch_size", std::to_string(sgd.batch_size)},
      {"step_size", std::to_string(sgd.step_size)},
      {"gamma", real_text(sgd.gamma)},
      {"total_iters", std::to_string(sgd.total_iters)},
      {"svm_c", real_text(svm.c)},
      {"svm_tol", real_text(svm.tol)},
      {"svm_max_iter", std::to_string(svm.max_iter)},
      {"ap_mode", to_string(ap_mode)},
      {"normalize", normalize == Normalize::l2 ? "l2" : "none"},
      {"seed", std::to_string(seed)},
      {"threads", std::to_string(threads)},
      {"class_names", join(class_names)},
  };
}

KMeansOptions PipelineConfig::kmeans_options() const {
  KMeansOptions o = kmeans;
  o.seed = seed;
  return o;
}

SgdHyper PipelineConfig::sgd_hyper() const {
  SgdHyper h = sgd;
  h.seed = seed;
  return h;
}

SvmOptions PipelineConfig::svm_options() const {
  SvmOptions o = svm;
  o.seed = seed;
  return o;
}

void PipelineConfig::validate() const {
  if (k < 1) throw InvalidArgument("k (= N2) must be >= 1");
  if (n1 < 1) throw InvalidArgument("n1 must be >= 1");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  if (!(kmeans.tol >= 0.0)) throw InvalidArgument("kmeans_tol must be >= 0");
  sgd_hyper().validate();
  svm_options().validate();
}

}  // namespace udft
