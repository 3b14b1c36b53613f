#include "gazefuse/features/toy_backbone.hpp"

#include <algorithm>
#include <cmath>

#include "gazefuse/error.hpp"
#include "gazefuse/rng.hpp"

namespace gazefuse {

void HeadBox::validate() const {
  for (double v : {x0, y0, x1, y1}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("head box coordinates must lie in [0, 1]");
  }
  if (!(x0 < x1 && y0 < y1)) throw InputError("head box is degenerate (need x0 < x1 and y0 < y1)");
}

void ToyBackboneConfig::validate() const {
  if (grid < 1) throw ConfigError("grid must be >= 1");
  if (out_dim < 4) throw ConfigError("out_dim must be >= 4");
}

std::vector<std::array<double, 4>> toy_cell_features(const RgbImage& image, const HeadBox& box, std::size_t grid) {
  box.validate();
  if (image.width < grid || image.height < grid) {
    throw InputError("image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                     " is smaller than the " + std::to_string(grid) + "x" + std::to_string(grid) + " grid");
  }
  std::vector<std::array<double, 4>> cells(grid * grid, {0, 0, 0, 0});
  std::vector<std::size_t> counts(grid * grid, 0);
  for (std::size_t y = 0; y < image.height; ++y) {
    const std::size_t cy = y * grid / image.height;
    for (std::size_t x = 0; x < image.width; ++x) {
      const std::size_t cell = cy * grid + x * grid / image.width;
      for (std::size_t c = 0; c < 3; ++c) cells[cell][c] += image.at(x, y, c);
      ++counts[cell];
    }
  }
  const double g = static_cast<double>(grid);
  for (std::size_t cy = 0; cy < grid; ++cy) {
    for (std::size_t cx = 0; cx < grid; ++cx) {
      auto& f = cells[cy * grid + cx];
      for (std::size_t c = 0; c < 3; ++c) f[c] /= static_cast<double>(counts[cy * grid + cx]);
      const double ox = std::max(0.0, std::min(box.x1, (cx + 1) / g) - std::max(box.x0, cx / g));
      const double oy = std::max(0.0, std::min(box.y1, (cy + 1) / g) - std::max(box.y0, cy / g));
      f[3] = ox * oy * g * g;
    }
  }
  return cells;
}

std::vector<float> toy_projection_matrix(const ToyBackboneConfig& config) {
  config.validate();
  Rng rng(config.projection_seed, "toy-backbone");
  std::vector<float> m(config.out_dim * 4);
  for (auto& v : m) v = static_cast<float>(rng.normal() * 0.5);
  return m;
}

TokenSequence toy_backbone_extract(const RgbImage& image, const HeadBox& box, const ToyBackboneConfig& config) {
  const auto projection = toy_projection_matrix(config);
  const auto cells = toy_cell_features(image, box, config.grid);
  TokenSequence seq;
  seq.n_tokens = cells.size();
  seq.dim = config.out_dim;
  seq.values.resize(seq.n_tokens * seq.dim);
  for (std::size_t t = 0; t < cells.size(); ++t) {
    for (std::size_t d = 0; d < seq.dim; ++d) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 4; ++k) acc += static_cast<double>(projection[d * 4 + k]) * cells[t][k];
      seq.values[t * seq.dim + d] = static_cast<float>(acc);
    }
  }
  return seq;
}

}  // namespace gazefuse
