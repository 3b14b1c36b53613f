#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gazefuse/features/image.hpp"
#include "gazefuse/features/token_sequence.hpp"

namespace gazefuse {

/// Normalized rectangle, coordinates in [0, 1] with x0 < x1 and y0 < y1.
struct HeadBox {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;

  /// Throws InputError for out-of-range or degenerate boxes.
  void validate() const;
  bool operator==(const HeadBox&) const = default;
};

struct ToyBackboneConfig {
  std::size_t grid = 8;
  std::size_t out_dim = 64;
  std::uint64_t projection_seed = 0;

  void validate() const;
  bool operator==(const ToyBackboneConfig&) const = default;
};

/// Per-cell (mean R, mean G, mean B, head-box coverage) for a grid x grid
/// partition, cells in row-major order. A pixel belongs to the cell holding
/// its top-left corner; coverage is the exact area fraction of the cell
/// inside the box, in normalized image coordinates.
std::vector<std::array<double, 4>> toy_cell_features(const RgbImage& image, const HeadBox& box, std::size_t grid);

/// Deterministic stand-in for a frozen gaze backbone: one token per cell,
/// each the cell's 4-vector mapped to out_dim through a fixed matrix drawn
/// from projection_seed. Throws InputError for degenerate boxes or images
/// smaller than the grid.
TokenSequence toy_backbone_extract(const RgbImage& image, const HeadBox& box, const ToyBackboneConfig& config);

/// The out_dim x 4 projection matrix used by toy_backbone_extract.
std::vector<float> toy_projection_matrix(const ToyBackboneConfig& config);

}  // namespace gazefuse
