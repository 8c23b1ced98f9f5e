#pragma once

// Little-endian container helpers shared by the feature, k-means, checkpoint and SVM
// files. Every file starts with a 4-byte magic and a u32 format version.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace udft::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class Writer {
 public:
  Writer(std::string_view magic, std::uint32_t version);

  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  template <typename T>
  void put_span(std::span<const T> values) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }

  const std::vector<char>& bytes() const { return buf_; }

  /// Throws IoError when the file cannot be written.
  void write_to(const std::filesystem::path& path) const;

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  /// Reads the whole file; checks magic and version (FormatError on mismatch).
  Reader(const std::filesystem::path& path, std::string_view magic, std::uint32_t version);

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }

  template <typename T>
  void get_span(std::span<T> out) {
    static_assert(std::is_trivially_copyable_v<T>);
    if (out.empty()) return;
    std::memcpy(out.data(), take(out.size_bytes()), out.size_bytes());
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

  /// CorruptionError when unread bytes remain.
  void expect_end() const;

  const std::string& source() const { return source_; }

 private:
  const char* take(std::size_t n);

  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::string source_;
};

}  // namespace udft::io
