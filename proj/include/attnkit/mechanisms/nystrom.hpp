#pragma once

#include <cmath>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/pinv.hpp"

namespace attnkit {

namespace detail {

// Segment boundaries for r near-equal contiguous chunks of n rows:
// segment s covers [floor(s*n/r), floor((s+1)*n/r)).
inline std::size_t segment_start(std::size_t s, std::size_t n, std::size_t r) {
  return s * n / r;
}

// r x cols matrix whose row s is the mean of the rows in segment s.
inline Matrix segment_means(ConstMatrixView x, std::size_t r) {
  Matrix out(r, x.cols);
  for (std::size_t s = 0; s < r; ++s) {
    const std::size_t lo = segment_start(s, x.rows, r);
    const std::size_t hi = segment_start(s + 1, x.rows, r);
    double* orow = out.row(s);
    for (std::size_t i = lo; i < hi; ++i) {
      const double* xrow = x.row(i);
      for (std::size_t j = 0; j < x.cols; ++j) orow[j] += xrow[j];
    }
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (std::size_t j = 0; j < x.cols; ++j) orow[j] *= inv;
  }
  return out;
}

}  // namespace detail

// Landmark-based low-rank softmax approximation:
//   softmax(Q Kt^T) pinv(softmax(Qt Kt^T)) softmax(Qt K^T) V
// with Qt, Kt built by segment means over r contiguous chunks.
inline Matrix nystrom_attention(const AttentionInputs& in, const MechanismConfig& cfg) {
  cfg.validate_common();
  if (!check_support(Mechanism::Nystrom, in.pattern)) {
    throw UnsupportedPatternError("nystrom attention supports ns only");
  }
  const std::size_t n = in.target_len();
  const std::size_t r = cfg.landmarks;
  if (r < 1) throw ConfigError("nystrom attention requires landmarks >= 1");
  if (r > n) throw ConfigError("nystrom attention requires landmarks <= sequence length");

  const std::size_t hd = in.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  Matrix out(n, in.dim());
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto qh = in.q.col_block(h * hd, hd);
    const auto kh = in.k.col_block(h * hd, hd);
    const auto vh = in.v.col_block(h * hd, hd);

    Matrix q_land = detail::segment_means(qh, r);
    Matrix k_land = detail::segment_means(kh, r);

    Matrix f = matmul_nt(qh, k_land);  // n x r
    scale_inplace(f.view(), scale);
    f = softmax_rows(f);

    Matrix core = matmul_nt(q_land, k_land);  // r x r
    scale_inplace(core.view(), scale);
    core = softmax_rows(core);
    PinvResult pinv = pinv_iterative(core, cfg.pinv_iters);

    Matrix b = matmul_nt(q_land, kh);  // r x m
    scale_inplace(b.view(), scale);
    b = softmax_rows(b);

    Matrix bv = matmul(b, vh);                       // r x hd
    Matrix zbv = matmul(pinv.pseudo_inverse, bv);    // r x hd
    matmul_into(f, zbv, out.col_block(h * hd, hd));  // n x hd
  }
  detail::require_finite(out, "nystrom_attention");
  return out;
}

}  // namespace attnkit
