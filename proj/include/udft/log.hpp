#pragma once

#include <filesystem>
#include <sstream>
#include <string>

namespace udft::log {

enum class Level { info, warn, error };

/// Also mirror messages into `path` (appending). Empty path detaches the file.
void set_file(const std::filesystem::path& path);
void set_quiet(bool quiet);
void write(Level level, const std::string& message);

template <typename... Args>
void info(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  write(Level::info, os.str());
}

template <typename... Args>
void warn(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  write(Level::warn, os.str());
}

template <typename... Args>
void error(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  write(Level::error, os.str());
}

}  // namespace udft::log
