#pragma once

#include <cmath>

#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"

namespace attnkit {

namespace detail {

// scores = (q x kt) * scale with kt already transposed to hd x m. Keeping k
// packed row-wise turns the inner loop into full-width FMA passes instead of
// per-element short dot products, and folding the scale avoids another sweep
// over the n x m buffer.
inline void scaled_scores_into(ConstMatrixView q, ConstMatrixView kt, double scale,
                               MutMatrixView out) {
  for (std::size_t i = 0; i < q.rows; ++i) {
    double* orow = out.row(i);
    for (std::size_t j = 0; j < out.cols; ++j) orow[j] = 0.0;
    const double* qrow = q.row(i);
    for (std::size_t t = 0; t < q.cols; ++t) {
      const double qt = qrow[t];
      const double* krow = kt.row(t);
      for (std::size_t j = 0; j < out.cols; ++j) orow[j] += qt * krow[j];
    }
    for (std::size_t j = 0; j < out.cols; ++j) orow[j] *= scale;
  }
}

}  // namespace detail

// Dense softmax attention, softmax(Q K^T / sqrt(d_head)) V per head with
// heads concatenated. Causal self masks scores at j > i additively before
// the softmax; causal cross keeps the full source visible (causality there
// constrains query availability, and each row depends on its query only).
// Scores and probabilities are materialized as separate n x m buffers so the
// counted peak reflects the quadratic score matrix.
inline Matrix vanilla_attention(const AttentionInputs& in) {
  const std::size_t n = in.target_len();
  const std::size_t m = in.source_len();
  const std::size_t hd = in.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool mask = in.pattern == AttentionPattern::CausalSelf;

  Matrix out = Matrix::uninitialized(n, in.dim());
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto qh = in.q.col_block(h * hd, hd);
    const Matrix kt = transpose(in.k.col_block(h * hd, hd));
    const Matrix vt = transpose(in.v.col_block(h * hd, hd));

    Matrix scores = Matrix::uninitialized(n, m);
    Matrix probs = Matrix::uninitialized(n, m);
    auto oh = out.col_block(h * hd, hd);

    // Row blocks keep each slab of scores cache-resident through the
    // score/softmax/value stages instead of streaming the full n x m
    // buffers through memory three times.
    constexpr std::size_t kRowBlock = 32;
    for (std::size_t r0 = 0; r0 < n; r0 += kRowBlock) {
      const std::size_t count = std::min(kRowBlock, n - r0);
      auto score_block = scores.view().row_block(r0, count);
      detail::scaled_scores_into(qh.row_block(r0, count), kt, scale, score_block);
      if (mask) {
        for (std::size_t i = 0; i < count; ++i) {
          double* r = score_block.row(i);
          for (std::size_t j = r0 + i + 1; j < m; ++j) r[j] = kCausalMask;
        }
      }
      auto prob_block = probs.view().row_block(r0, count);
      softmax_rows_into(score_block, prob_block);
      matmul_nt_into(prob_block, vt, oh.row_block(r0, count));
    }
  }
  detail::require_finite(out, "vanilla_attention");
  return out;
}

}  // namespace attnkit
