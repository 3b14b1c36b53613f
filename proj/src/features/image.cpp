#include "gazefuse/features/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"

namespace gazefuse {

RgbImage::RgbImage(std::size_t w, std::size_t h, float r, float g, float b) : width(w), height(h), pixels(w * h * 3) {
  for (std::size_t i = 0; i < w * h; ++i) {
    pixels[3 * i] = r;
    pixels[3 * i + 1] = g;
    pixels[3 * i + 2] = b;
  }
}

namespace {

class HeaderScanner {
 public:
  HeaderScanner(const std::string& bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::size_t number() {
    skip_space_and_comments();
    std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > (1u << 24)) throw FormatError(source_ + ": PPM header value too large");
      ++pos_;
    }
    if (pos_ == start) throw FormatError(source_ + ": malformed PPM header");
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  const std::string& source_;
  std::size_t pos_ = 2;
};

}  // namespace

RgbImage decode_ppm(const std::string& bytes, const std::string& source) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '3')) {
    throw FormatError(source + ": not a PPM image (expected P6 or P3 magic)");
  }
  const bool binary = bytes[1] == '6';
  HeaderScanner scan(bytes, source);
  const std::size_t width = scan.number();
  const std::size_t height = scan.number();
  const std::size_t maxval = scan.number();
  if (width == 0 || height == 0) throw FormatError(source + ": PPM image has zero extent");
  if (maxval == 0 || maxval > 255) throw FormatError(source + ": only 8-bit PPM is supported");

  RgbImage image(width, height);
  const std::size_t count = width * height * 3;
  if (binary) {
    scan.advance(1);  // single whitespace byte before the raster
    if (bytes.size() < scan.pos() + count) throw FormatError(source + ": truncated PPM raster");
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = static_cast<unsigned char>(bytes[scan.pos() + i]);
      if (v > maxval) throw FormatError(source + ": PPM sample exceeds maxval");
      image.pixels[i] = static_cast<float>(v) / static_cast<float>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t v = scan.number();
      if (v > maxval) throw FormatError(source + ": PPM sample exceeds maxval");
      image.pixels[i] = static_cast<float>(v) / static_cast<float>(maxval);
    }
  }
  return image;
}

RgbImage read_ppm(const std::filesystem::path& path) { return decode_ppm(io::read_file(path), path.string()); }

std::string encode_ppm(const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.pixels.size());
  for (float v : image.pixels) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.f, 1.f) * 255.f))));
  }
  return out;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_ppm(image));
}

}  // namespace gazefuse
