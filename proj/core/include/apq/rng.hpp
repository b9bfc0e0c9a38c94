#pragma once

#include <cstdint>
#include <cmath>

#include "apq/types.hpp"

namespace apq {

// Counter-based deterministic random stream.  Every draw is a pure function
// of (seed, stream, counter), so values do not depend on call order or on
// which thread asks for them; parallel sweeps stay bit-reproducible.
struct CounterRng {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  // SplitMix64 finalizer over a mixed (seed, stream, counter) word.
  std::uint64_t raw(std::uint64_t counter) const {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z += counter * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL;
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27; z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  // Uniform in [0, 1): top 53 bits of the mixed word.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(raw(counter) >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes counters 2c and 2c+1.
  double normal(std::uint64_t counter) const {
    double u1 = uniform(2 * counter);
    double u2 = uniform(2 * counter + 1);
    // Guard against log(0).
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Standard complex normal (real and imaginary parts ~ N(0, 1)).
  Complex cnormal(std::uint64_t counter) const {
    return Complex(normal(2 * counter), normal(2 * counter + 1));
  }

  // Complex Gaussian vector of length n starting at counter base `c0 * n`.
  Vector gaussian_vector(int n, std::uint64_t c0) const {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = cnormal(c0 * static_cast<std::uint64_t>(n) + i);
    return v;
  }

  // Complex Gaussian matrix (column-major fill), counter block c0 * rows * cols.
  Matrix gaussian_matrix(int rows, int cols, std::uint64_t c0) const {
    Matrix m(rows, cols);
    std::uint64_t base = c0 * static_cast<std::uint64_t>(rows) * cols;
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i)
        m(i, j) = cnormal(base++);
    return m;
  }

  CounterRng substream(std::uint64_t s) const { return CounterRng{seed, raw(~s)}; }
};

} // namespace apq
