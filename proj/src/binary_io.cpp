#include "gazefuse/binary_io.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "gazefuse/error.hpp"

namespace gazefuse::io {

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s);
}

std::uint64_t ByteReader::get(int width) {
  if (remaining() < static_cast<std::size_t>(width)) {
    throw FormatError(context_ + ": truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
  }
  pos_ += width;
  return v;
}

std::string_view ByteReader::bytes(std::size_t n) {
  if (remaining() < n) throw FormatError(context_ + ": truncated at byte " + std::to_string(pos_));
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::string ByteReader::str(std::size_t max_len) {
  const auto n = u32();
  if (n > max_len) throw FormatError(context_ + ": implausible string length " + std::to_string(n));
  return std::string(bytes(n));
}

void ByteReader::expect_end() const {
  if (!at_end()) {
    throw FormatError(context_ + ": " + std::to_string(remaining()) + " unexpected trailing bytes");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gazefuse::io
