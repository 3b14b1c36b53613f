#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gazefuse {

/// Seeded random stream. Each stream is derived from a run seed plus a
/// stream name, so weight init, dropout masks, shuffling and balancing
/// never share draws even when they share a seed.
///
/// Conversions from raw 64-bit draws to floats/ints are done here rather
/// than with <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable 64-bit FNV-1a hash, used to name streams and key records.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace gazefuse
