#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "gazefuse/pipeline/dataset.hpp"

namespace gazefuse::testing {

// n one-second samples of one session, stored out of time order so callers
// can check that splitting sorts by time. The first `positives` ticks are positive.
inline std::vector<DualFrameSample> session_samples(const std::string& session, std::size_t n,
                                                    std::size_t positives) {
  std::size_t stride = 7;
  while (std::gcd(stride, n) != 1) ++stride;
  std::vector<DualFrameSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    DualFrameSample s;
    s.session = session;
    const double t = static_cast<double>((i * stride) % n);
    s.frames = {t, t, t + 0.25};
    s.box_a = s.box_b = {0, 0, 1, 1};
    s.label = (i * stride) % n < positives ? 1 : 0;
    out.push_back(s);
  }
  return out;
}

}  // namespace gazefuse::testing
