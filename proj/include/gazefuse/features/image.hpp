#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace gazefuse {

/// RGB raster with channel values in [0, 1], stored row-major as
/// (row, column, channel).
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h, float r = 0.f, float g = 0.f, float b = 0.f);

  float& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
  float at(std::size_t x, std::size_t y, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }

  bool operator==(const RgbImage&) const = default;
};

/// Binary PPM (P6, maxval <= 255) or ASCII PPM (P3). Throws FormatError on
/// anything else, LookupError when the file is missing.
RgbImage read_ppm(const std::filesystem::path& path);
RgbImage decode_ppm(const std::string& bytes, const std::string& source = "<memory>");
/// Writes P6 with maxval 255; values are clamped and rounded to 8 bits.
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
std::string encode_ppm(const RgbImage& image);

}  // namespace gazefuse
