#pragma once

#include <cmath>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"

namespace attnkit {

// Sliding-window attention. Noncausal self: query i attends to
// [i - w/2, i + w/2] clipped to the sequence; causal self: [i - w/2, i].
// The window always contains the query position itself.
inline Matrix local_attention(const AttentionInputs& in, const MechanismConfig& cfg) {
  cfg.validate_common();
  if (!check_support(Mechanism::Local, in.pattern)) {
    throw UnsupportedPatternError("local attention supports ns and cs only");
  }
  if (cfg.window < 1) throw ConfigError("local attention requires window >= 1");

  const std::size_t n = in.target_len();
  const std::size_t hd = in.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const std::size_t half = cfg.window / 2;
  const bool causal = is_causal(in.pattern);

  Matrix out(n, in.dim());
  std::vector<double> weights(2 * half + 1);
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto qh = in.q.col_block(h * hd, hd);
    const auto kh = in.k.col_block(h * hd, hd);
    const auto vh = in.v.col_block(h * hd, hd);
    auto oh = out.col_block(h * hd, hd);

    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= half ? i - half : 0;
      const std::size_t hi = causal ? i : std::min(n - 1, i + half);
      const std::size_t width = hi - lo + 1;

      const double* qrow = qh.row(i);
      for (std::size_t j = 0; j < width; ++j) {
        const double* krow = kh.row(lo + j);
        double acc = 0.0;
        for (std::size_t t = 0; t < hd; ++t) acc += qrow[t] * krow[t];
        weights[j] = acc * scale;
      }
      softmax_span_inplace(weights.data(), width);

      double* orow = oh.row(i);
      for (std::size_t t = 0; t < hd; ++t) orow[t] = 0.0;
      for (std::size_t j = 0; j < width; ++j) {
        const double wj = weights[j];
        const double* vrow = vh.row(lo + j);
        for (std::size_t t = 0; t < hd; ++t) orow[t] += wj * vrow[t];
      }
    }
  }
  detail::require_finite(out, "local_attention");
  return out;
}

}  // namespace attnkit
