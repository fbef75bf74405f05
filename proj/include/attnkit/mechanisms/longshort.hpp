#pragma once

#include <cmath>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/mechanisms/abc.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

namespace detail {

// Softmax down each column, normalizing over the sequence axis so the
// compressed rows P^T K stay convex combinations of key rows.
inline Matrix softmax_cols(ConstMatrixView a) {
  Matrix out(a.rows, a.cols);
  for (std::size_t j = 0; j < a.cols; ++j) {
    double mx = a(0, j);
    for (std::size_t i = 1; i < a.rows; ++i) mx = std::max(mx, a(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
      out(i, j) = std::exp(a(i, j) - mx);
      sum += out(i, j);
    }
    const double inv = 1.0 / sum;
    for (std::size_t i = 0; i < a.rows; ++i) out(i, j) *= inv;
  }
  return out;
}

struct SegmentWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;  // exclusive
};

// Segment-wise window: token i in segment s = i / len sees
// [(s-1) len + len/2, (s+1) len + len/2), clipped to the sequence.
inline SegmentWindow segment_window(std::size_t i, std::size_t len, std::size_t m) {
  const std::size_t seg = i / len;
  const std::size_t half = len / 2;
  const std::size_t base = seg * len;
  const std::size_t lo = base + half >= len ? base + half - len : 0;
  const std::size_t hi = std::min(m, base + len + half);
  return {lo, hi};
}

}  // namespace detail

// Two-branch attention: a compressed long-range memory of r rows obtained by
// projecting keys with a learnable d x r map (P = column softmax of K Wp,
// memory = P^T K / P^T V), and a segment-wise local window of the original
// keys. Each query softmax-attends over the window and the memory jointly.
// Causal self rebuilds the memory from the prefix at every position through
// the same running-max recurrence used by abc, and clips the window to j <= i.
// landmarks = 0 disables the long branch and leaves pure windowed attention.
inline Matrix longshort_attention(const AttentionInputs& in, const MechanismConfig& cfg) {
  cfg.validate_common();
  if (!check_support(Mechanism::Longshort, in.pattern)) {
    throw UnsupportedPatternError("longshort supports ns and cs only");
  }
  if (cfg.window < 1) throw ConfigError("longshort requires window >= 1");

  const std::size_t n = in.target_len();
  const std::size_t m = in.source_len();
  const std::size_t r = cfg.landmarks;
  const std::size_t hd = in.head_dim();
  const std::size_t len = cfg.window;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool causal = is_causal(in.pattern);

  Rng rng(cfg.seed);
  Matrix out(n, in.dim());
  std::vector<double> weights(2 * len + r + 1);
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto qh = in.q.col_block(h * hd, hd);
    const auto kh = in.k.col_block(h * hd, hd);
    const auto vh = in.v.col_block(h * hd, hd);
    auto oh = out.col_block(h * hd, hd);

    Matrix w_p = gaussian_matrix(rng, hd, r);
    Matrix slot_scores = r > 0 ? matmul(kh, w_p) : Matrix();  // m x r

    Matrix mem_k(r, hd), mem_v(r, hd);
    detail::SlotRecurrence key_mem(r, hd), value_mem(r, hd);
    if (r > 0 && !causal) {
      Matrix p = detail::softmax_cols(slot_scores);
      mem_k = matmul_tn(p, kh);
      mem_v = matmul_tn(p, vh);
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (r > 0 && causal) {
        key_mem.absorb(slot_scores.row(i), kh.row(i));
        value_mem.absorb(slot_scores.row(i), vh.row(i));
        key_mem.normalized(mem_k.view());
        value_mem.normalized(mem_v.view());
      }

      auto win = detail::segment_window(i, len, m);
      if (causal) win.hi = std::min(win.hi, i + 1);
      const std::size_t width = win.hi - win.lo;

      const double* qrow = qh.row(i);
      for (std::size_t j = 0; j < width; ++j) {
        const double* krow = kh.row(win.lo + j);
        double acc = 0.0;
        for (std::size_t t = 0; t < hd; ++t) acc += qrow[t] * krow[t];
        weights[j] = acc * scale;
      }
      for (std::size_t s = 0; s < r; ++s) {
        const double* krow = mem_k.row(s);
        double acc = 0.0;
        for (std::size_t t = 0; t < hd; ++t) acc += qrow[t] * krow[t];
        weights[width + s] = acc * scale;
      }
      softmax_span_inplace(weights.data(), width + r);

      double* orow = oh.row(i);
      for (std::size_t t = 0; t < hd; ++t) orow[t] = 0.0;
      for (std::size_t j = 0; j < width; ++j) {
        const double wj = weights[j];
        const double* vrow = vh.row(win.lo + j);
        for (std::size_t t = 0; t < hd; ++t) orow[t] += wj * vrow[t];
      }
      for (std::size_t s = 0; s < r; ++s) {
        const double ws = weights[width + s];
        const double* vrow = mem_v.row(s);
        for (std::size_t t = 0; t < hd; ++t) orow[t] += ws * vrow[t];
      }
    }
  }
  detail::require_finite(out, "longshort_attention");
  return out;
}

}  // namespace attnkit
