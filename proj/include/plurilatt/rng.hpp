#pragma once

#include <cstdint>
#include <random>

#include "plurilatt/point.hpp"

namespace plurilatt {

// Deterministic RNG. mt19937_64 output is fully specified by the standard and
// the post-processing below avoids std::uniform_real_distribution, whose
// stream is implementation-defined; the same seed yields the same values on
// every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Uniform in [0,1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  // Complex with Re in [re_lo, re_hi], Im in [im_lo, im_hi].
  Cx complex_in(double re_lo, double re_hi, double im_lo, double im_hi) {
    double re = uniform(re_lo, re_hi);
    double im = uniform(im_lo, im_hi);
    return {re, im};
  }

  // Generic nonzero-ish complex in the unit-ish box, bounded away from 0.
  Cx complex_unit() {
    while (true) {
      Cx z = complex_in(-1.0, 1.0, -1.0, 1.0);
      if (std::abs(z) > 0.2) return z;
    }
  }

  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace plurilatt
