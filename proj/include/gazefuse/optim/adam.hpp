#pragma once

#include <cstdint>
#include <vector>

#include "gazefuse/model/parameters.hpp"

namespace gazefuse {

struct AdamHyper {
  double learning_rate = 6.1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Moment buffers kept in double, one per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of every parameter from its current
/// gradient (a parameter without a gradient buffer counts as zero gradient).
/// Initializes `state` on first use; throws DimensionError if it was built
/// for differently shaped parameters.
void adam_step(ParameterStore<float>& params, AdamState& state, const AdamHyper& hyper);

}  // namespace gazefuse
