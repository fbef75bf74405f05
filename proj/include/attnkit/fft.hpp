#pragma once

#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "attnkit/errors.hpp"

namespace attnkit {

// Iterative radix-2 Cooley-Tukey transform, in place. a.size() must be a
// power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ShapeError("fft: size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wstep(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wstep;
      }
    }
  }

  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Causal linear convolution y_t = sum_{s<=t} kernel_s * input_{t-s},
// truncated to the input length. Inputs are zero-padded to the next power of
// two >= 2n, so no circular wrap-around reaches the reported samples.
inline std::vector<double> conv_fft(std::span<const double> kernel,
                                    std::span<const double> input) {
  const std::size_t n = input.size();
  if (kernel.size() != n) throw ShapeError("conv_fft: kernel and input lengths differ");
  if (n == 0) return {};
  if (n == 1) return {kernel[0] * input[0]};

  const std::size_t padded = next_pow2(2 * n);
  std::vector<std::complex<double>> ka(padded), ua(padded);
  for (std::size_t i = 0; i < n; ++i) {
    ka[i] = kernel[i];
    ua[i] = input[i];
  }
  fft_inplace(ka, false);
  fft_inplace(ua, false);
  for (std::size_t i = 0; i < padded; ++i) ka[i] *= ua[i];
  fft_inplace(ka, true);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = ka[i].real();
    if (!std::isfinite(out[i])) throw NumericError("conv_fft produced a non-finite value");
  }
  return out;
}

}  // namespace attnkit
