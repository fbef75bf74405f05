#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/fft.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

// Diagonal state-space parameters, one independent system per channel.
// A must have strictly negative real parts for the discretized kernel to
// stay bounded.
struct S4DParams {
  std::size_t channels = 0;
  std::size_t state_dim = 0;
  std::vector<std::complex<double>> a;  // channels x state_dim, row-major
  std::vector<std::complex<double>> b;
  std::vector<std::complex<double>> c;
  std::vector<double> log_dt;  // per channel
  std::vector<double> d;       // feedthrough per channel

  std::complex<double> at(std::size_t ch, std::size_t k) const { return a[ch * state_dim + k]; }

  // A_k = -1/2 + i pi k, B = 1, C standard complex Gaussian, log step size
  // uniform in [ln 0.001, ln 0.1], feedthrough 1.
  static S4DParams init(std::size_t channels, std::size_t state_dim, Rng& rng) {
    S4DParams p;
    p.channels = channels;
    p.state_dim = state_dim;
    p.a.resize(channels * state_dim);
    p.b.assign(channels * state_dim, {1.0, 0.0});
    p.c.resize(channels * state_dim);
    p.log_dt.resize(channels);
    p.d.assign(channels, 1.0);
    for (std::size_t ch = 0; ch < channels; ++ch) {
      for (std::size_t k = 0; k < state_dim; ++k) {
        p.a[ch * state_dim + k] = {-0.5, std::numbers::pi * static_cast<double>(k)};
        p.c[ch * state_dim + k] = {rng.next_gaussian(), rng.next_gaussian()};
      }
    }
    const double lo = std::log(0.001), hi = std::log(0.1);
    for (std::size_t ch = 0; ch < channels; ++ch) {
      p.log_dt[ch] = lo + rng.next_uniform() * (hi - lo);
    }
    return p;
  }

  void validate() const {
    if (channels == 0 || state_dim == 0) throw ConfigError("s4d: empty parameters");
    for (const auto& ak : a) {
      if (ak.real() >= 0.0) throw NumericError("s4d: unstable state, Re(A) >= 0");
    }
  }
};

namespace detail {

// Zero-order-hold discretization and kernel K_t = Re(C Abar^t Bbar) for one
// channel, materialized for t = 0..n-1.
inline std::vector<double> s4d_kernel(const S4DParams& p, std::size_t ch, std::size_t n) {
  const std::size_t r = p.state_dim;
  const double dt = std::exp(p.log_dt[ch]);
  std::vector<std::complex<double>> abar(r), cb(r), power(r, {1.0, 0.0});
  for (std::size_t k = 0; k < r; ++k) {
    const std::complex<double> ak = p.a[ch * r + k];
    abar[k] = std::exp(dt * ak);
    const std::complex<double> bbar = (abar[k] - 1.0) / ak * p.b[ch * r + k];
    cb[k] = p.c[ch * r + k] * bbar;
  }
  std::vector<double> kernel(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < r; ++k) {
      acc += cb[k] * power[k];
      power[k] *= abar[k];
    }
    kernel[t] = acc.real();
    if (!std::isfinite(kernel[t])) throw NumericError("s4d: non-finite kernel");
  }
  return kernel;
}

}  // namespace detail

// LTI sequence layer: per channel, y = conv(K, u) + D u with the kernel of
// the discretized diagonal system. Causal self runs the forward pass only;
// noncausal self adds a reversed pass whose lag-0 tap is dropped so each
// position is counted exactly once.
inline Matrix s4d_layer(const Matrix& u, const S4DParams& params, AttentionPattern pattern) {
  params.validate();
  if (!check_support(Mechanism::S4d, pattern)) {
    throw UnsupportedPatternError("s4d supports ns and cs only");
  }
  if (u.cols() != params.channels) throw ShapeError("s4d: channel count mismatch");
  if (u.rows() == 0) throw ShapeError("s4d: empty input");

  const std::size_t n = u.rows();
  const bool bidirectional = !is_causal(pattern);

  Matrix out(n, u.cols());
  std::vector<double> uin(n), urev(n);
  for (std::size_t ch = 0; ch < params.channels; ++ch) {
    std::vector<double> kernel = detail::s4d_kernel(params, ch, n);
    for (std::size_t t = 0; t < n; ++t) uin[t] = u(t, ch);

    std::vector<double> fwd = conv_fft(kernel, uin);
    if (bidirectional) {
      for (std::size_t t = 0; t < n; ++t) urev[t] = uin[n - 1 - t];
      std::vector<double> back_kernel = kernel;
      back_kernel[0] = 0.0;
      std::vector<double> bwd = conv_fft(back_kernel, urev);
      for (std::size_t t = 0; t < n; ++t) fwd[t] += bwd[n - 1 - t];
    }

    const double feed = params.d[ch];
    for (std::size_t t = 0; t < n; ++t) out(t, ch) = fwd[t] + feed * uin[t];
  }
  detail::require_finite(out, "s4d_layer");
  return out;
}

// Registry adapter: the state-space layer consumes the value stream of the
// attention inputs (it has no query/key notion).
inline Matrix s4d_attention(const AttentionInputs& in, const MechanismConfig& cfg) {
  cfg.validate_common();
  if (cfg.state_dim < 1) throw ConfigError("s4d requires state_dim >= 1");
  Rng rng(cfg.seed);
  S4DParams params = S4DParams::init(in.dim(), cfg.state_dim, rng);
  return s4d_layer(in.v, params, in.pattern);
}

}  // namespace attnkit
