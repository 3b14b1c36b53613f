#include "gazefuse/features/token_sequence.hpp"

#include <cmath>

#include "gazefuse/error.hpp"

namespace gazefuse {

void TokenSequence::validate() const {
  if (n_tokens == 0 || dim == 0) throw InputError("token sequence needs N > 0 and D > 0");
  if (values.size() != n_tokens * dim) {
    throw InputError("token sequence holds " + std::to_string(values.size()) + " values, expected " +
                     std::to_string(n_tokens) + " x " + std::to_string(dim));
  }
  for (float v : values)
    if (!std::isfinite(v)) throw InputError("token sequence for '" + session + "' contains a non-finite value");
}

std::int64_t timestamp_ms(double seconds) { return std::llround(seconds * 1000.0); }

}  // namespace gazefuse
