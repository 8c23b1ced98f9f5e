#include "udft/log.hpp"

#include <fstream>
#include <iostream>
#include <mutex>

namespace udft::log {
namespace {

struct Sink {
  std::mutex mu;
  std::ofstream file;
  bool quiet = false;
};

Sink& sink() {
  static Sink s;
  return s;
}

const char* tag(Level level) {
  switch (level) {
    case Level::info: return "[info] ";
    case Level::warn: return "[warn] ";
    case Level::error: return "[error] ";
  }
  return "";
}

}  // namespace

void set_file(const std::filesystem::path& path) {
  auto& s = sink();
  std::lock_guard lock(s.mu);
  if (s.file.is_open()) s.file.close();
  if (!path.empty()) s.file.open(path, std::ios::app);
}

void set_quiet(bool quiet) {
  auto& s = sink();
  std::lock_guard lock(s.mu);
  s.quiet = quiet;
}

void write(Level level, const std::string& message) {
  auto& s = sink();
  std::lock_guard lock(s.mu);
  if (!s.quiet || level != Level::info) std::cerr << tag(level) << message << '\n';
  if (s.file.is_open()) s.file << tag(level) << message << '\n' << std::flush;
}

}  // namespace udft::log
