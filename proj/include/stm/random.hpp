#pragma once

#include <cstdint>

#include "stm/core_linalg.hpp"

namespace stm {

/// SplitMix64 generator. Every seeded draw in the library and CLI goes through
/// this so that runs are reproducible across platforms and implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
  }

  // Uniform in [0, 1) from the top 53 bits.
  Real uniform() { return static_cast<Real>(next() >> 11U) * 0x1.0p-53; }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  Vector uniform_vector(Index n, Real lo = -1.0, Real hi = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace stm
