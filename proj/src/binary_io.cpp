#include "udft/binary_io.hpp"

#include <fstream>
#include <iterator>

#include "udft/error.hpp"

namespace udft::io {

Writer::Writer(std::string_view magic, std::uint32_t version) {
  buf_.insert(buf_.end(), magic.begin(), magic.end());
  put(version);
}

void Writer::write_to(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Reader::Reader(const std::filesystem::path& path, std::string_view magic, std::uint32_t version)
    : source_(path.string()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + source_ + "'");
  buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (buf_.size() < magic.size() + sizeof(std::uint32_t) ||
      std::string_view(buf_.data(), magic.size()) != magic)
    throw FormatError(source_ + ": bad magic, expected \"" + std::string(magic) + "\"");
  pos_ = magic.size();
  const auto v = get<std::uint32_t>();
  if (v != version)
    throw FormatError(source_ + ": unsupported format version " + std::to_string(v));
}

const char* Reader::take(std::size_t n) {
  if (n > remaining())
    throw CorruptionError(source_ + ": truncated payload (need " + std::to_string(n) + " bytes at offset " +
                          std::to_string(pos_) + ", " + std::to_string(remaining()) + " left)");
  const char* p = buf_.data() + pos_;
  pos_ += n;
  return p;
}

void Reader::expect_end() const {
  if (remaining() != 0)
    throw CorruptionError(source_ + ": " + std::to_string(remaining()) + " trailing bytes after payload");
}

}  // namespace udft::io
