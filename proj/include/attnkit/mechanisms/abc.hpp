#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

namespace detail {

// Streaming softmax aggregation of rows under per-slot scores, kept stable
// with a running maximum: after consuming rows 0..i, slot s holds
// sum_j exp(x_sj) row_j / sum_j exp(x_sj) without ever exponentiating an
// unshifted score.
struct SlotRecurrence {
  std::size_t slots = 0;
  std::size_t width = 0;
  std::vector<double> maxes;
  std::vector<double> nums;  // slots x width
  std::vector<double> dens;

  SlotRecurrence(std::size_t slots_, std::size_t width_)
      : slots(slots_),
        width(width_),
        maxes(slots_, -std::numeric_limits<double>::infinity()),
        nums(slots_ * width_, 0.0),
        dens(slots_, 0.0) {}

  void absorb(const double* scores, const double* row) {
    for (std::size_t s = 0; s < slots; ++s) {
      const double x = scores[s];
      double* num = nums.data() + s * width;
      if (x > maxes[s]) {
        const double rescale = std::exp(maxes[s] - x);
        for (std::size_t t = 0; t < width; ++t) num[t] *= rescale;
        dens[s] *= rescale;
        maxes[s] = x;
      }
      const double wgt = std::exp(x - maxes[s]);
      for (std::size_t t = 0; t < width; ++t) num[t] += wgt * row[t];
      dens[s] += wgt;
    }
  }

  void normalized(MutMatrixView out) const {
    for (std::size_t s = 0; s < slots; ++s) {
      const double inv = 1.0 / dens[s];
      const double* num = nums.data() + s * width;
      double* orow = out.row(s);
      for (std::size_t t = 0; t < width; ++t) orow[t] = num[t] * inv;
    }
  }
};

inline void attend_to_memory(const double* qrow, ConstMatrixView mem_k,
                             ConstMatrixView mem_v, double scale,
                             std::vector<double>& weights, double* orow) {
  const std::size_t slots = mem_k.rows;
  const std::size_t hd = mem_k.cols;
  for (std::size_t s = 0; s < slots; ++s) {
    const double* krow = mem_k.row(s);
    double acc = 0.0;
    for (std::size_t t = 0; t < hd; ++t) acc += qrow[t] * krow[t];
    weights[s] = acc * scale;
  }
  softmax_span_inplace(weights.data(), slots);
  for (std::size_t t = 0; t < hd; ++t) orow[t] = 0.0;
  for (std::size_t s = 0; s < slots; ++s) {
    const double ws = weights[s];
    const double* vrow = mem_v.row(s);
    for (std::size_t t = 0; t < hd; ++t) orow[t] += ws * vrow[t];
  }
}

}  // namespace detail

// Bounded-memory attention: r learned slots summarize keys and values as
//   Kt = softmax(Wk K^T) K,  Vt = softmax(Wv V^T) V
// and each query attends to the r slots. Under causal self the slot
// softmaxes are recomputed over the prefix for every position via the
// running-max recurrence, so position i only ever sees rows <= i; cross
// patterns keep the full source memory, making cc identical to nc.
inline Matrix abc_attention(const AttentionInputs& in, const MechanismConfig& cfg) {
  cfg.validate_common();
  if (cfg.landmarks < 1) throw ConfigError("abc requires landmarks >= 1");

  const std::size_t n = in.target_len();
  const std::size_t m = in.source_len();
  const std::size_t r = cfg.landmarks;
  const std::size_t hd = in.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  Rng rng(cfg.seed);
  Matrix out(n, in.dim());
  std::vector<double> weights(r);
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto qh = in.q.col_block(h * hd, hd);
    const auto kh = in.k.col_block(h * hd, hd);
    const auto vh = in.v.col_block(h * hd, hd);
    auto oh = out.col_block(h * hd, hd);

    Matrix wk = gaussian_matrix(rng, r, hd);
    Matrix wv = gaussian_matrix(rng, r, hd);

    if (in.pattern == AttentionPattern::CausalSelf) {
      detail::SlotRecurrence key_mem(r, hd), value_mem(r, hd);
      Matrix mem_k(r, hd), mem_v(r, hd);
      std::vector<double> sk(r), sv(r);
      for (std::size_t i = 0; i < n; ++i) {
        const double* krow = kh.row(i);
        const double* vrow = vh.row(i);
        for (std::size_t s = 0; s < r; ++s) {
          const double* wkrow = wk.row(s);
          const double* wvrow = wv.row(s);
          double ak = 0.0, av = 0.0;
          for (std::size_t t = 0; t < hd; ++t) {
            ak += wkrow[t] * krow[t];
            av += wvrow[t] * vrow[t];
          }
          sk[s] = ak;
          sv[s] = av;
        }
        key_mem.absorb(sk.data(), krow);
        value_mem.absorb(sv.data(), vrow);
        key_mem.normalized(mem_k.view());
        value_mem.normalized(mem_v.view());
        detail::attend_to_memory(qh.row(i), mem_k, mem_v, scale, weights, oh.row(i));
      }
    } else {
      Matrix slot_k = matmul_nt(wk, kh);  // r x m
      Matrix slot_v = matmul_nt(wv, vh);
      Matrix mem_k = matmul(softmax_rows(slot_k), kh);  // r x hd
      Matrix mem_v = matmul(softmax_rows(slot_v), vh);
      for (std::size_t i = 0; i < n; ++i) {
        detail::attend_to_memory(qh.row(i), mem_k, mem_v, scale, weights, oh.row(i));
      }
      (void)m;
    }
  }
  detail::require_finite(out, "abc_attention");
  return out;
}

}  // namespace attnkit
