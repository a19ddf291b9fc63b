#pragma once

#include <cstdint>
#include <random>

#include "curvkit/common.hpp"

namespace curvkit {

/// Seeded random stream. mt19937_64 has a fully specified sequence and the
/// uniforms are derived by bit shifts, so identical seeds give identical
/// streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  long integer(long lo, long hi) {
    if (hi < lo) throw ConfigError("empty integer range");
    const long span = hi - lo + 1;
    const long v = lo + static_cast<long>(uniform() * static_cast<double>(span));
    return v > hi ? hi : v;
  }

  Complex complex_box(double amp) { return {uniform(-amp, amp), uniform(-amp, amp)}; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace curvkit
