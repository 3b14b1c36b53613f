#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gazefuse/task.hpp"
#include "gazefuse/tensor.hpp"

namespace gazefuse {

/// Backbone output for one frame of one view: N tokens of width D.
struct TokenSequence {
  std::string session;
  View view = View::Infant;
  double timestamp_s = 0.0;
  std::size_t n_tokens = 0;
  std::size_t dim = 0;
  std::vector<float> values;  // n_tokens x dim, row-major

  /// Throws InputError unless N, D > 0, values has N*D entries, all finite.
  void validate() const;
  Tensor as_tensor() const { return Tensor({n_tokens, dim}, values); }

  bool operator==(const TokenSequence&) const = default;
};

/// Timestamps are keyed to whole milliseconds.
std::int64_t timestamp_ms(double seconds);

}  // namespace gazefuse
