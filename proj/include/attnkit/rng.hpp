#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "attnkit/matrix.hpp"

namespace attnkit {

// Deterministic xoshiro256++ generator seeded through splitmix64, with
// Box-Muller Gaussians on top. Both algorithms are fixed here rather than
// taken from <random> so that identical seeds reproduce identical streams
// bit-for-bit on any platform. Every next_gaussian() call consumes exactly
// two raw 64-bit draws (the sine branch of the pair is discarded), which
// keeps draw positions predictable across call sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      // splitmix64 expansion
      x += 0x9E3779B97F4A7C15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t seed_words(std::size_t i) const { return state_[i]; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in (0, 1]: never zero, so it is always a valid log argument.
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_gaussian() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, bound) by rejection; bound must be nonzero.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

// Matrix of i.i.d. standard normal entries, filled row-major.
inline Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m = Matrix::uninitialized(rows, cols);
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = rng.next_gaussian();
  return m;
}

}  // namespace attnkit
