#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

namespace detail {

// max_j(s_ij) - mean_j(s_ij) over the sampled keys, per query.
inline std::vector<double> probsparse_sparsity(ConstMatrixView q, ConstMatrixView k,
                                               const std::vector<std::size_t>& sampled_keys) {
  const std::size_t hd = q.cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<double> sparsity(q.rows);
  for (std::size_t i = 0; i < q.rows; ++i) {
    const double* qrow = q.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t idx : sampled_keys) {
      const double* krow = k.row(idx);
      double acc = 0.0;
      for (std::size_t t = 0; t < hd; ++t) acc += qrow[t] * krow[t];
      acc *= scale;
      mx = std::max(mx, acc);
      sum += acc;
    }
    sparsity[i] = mx - sum / static_cast<double>(sampled_keys.size());
  }
  return sparsity;
}

// Full attention for the top-u queries by sparsity, column mean of V for the
// rest. Exposed with an explicit u so tests can pin the selection count.
inline void probsparse_head(ConstMatrixView q, ConstMatrixView k, ConstMatrixView v,
                            const std::vector<std::size_t>& sampled_keys,
                            std::size_t top_u, MutMatrixView out) {
  const std::size_t n = q.rows;
  const std::size_t m = k.rows;
  const std::size_t hd = q.cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  const std::vector<double> sparsity = probsparse_sparsity(q, k, sampled_keys);

  // Ties break toward the lower query index.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sparsity[a] > sparsity[b];
  });

  std::vector<char> selected(n, 0);
  for (std::size_t r = 0; r < std::min(top_u, n); ++r) selected[order[r]] = 1;

  std::vector<double> v_mean(hd, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double* vrow = v.row(j);
    for (std::size_t t = 0; t < hd; ++t) v_mean[t] += vrow[t];
  }
  for (std::size_t t = 0; t < hd; ++t) v_mean[t] /= static_cast<double>(m);

  std::vector<double> weights(m);
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.row(i);
    if (!selected[i]) {
      for (std::size_t t = 0; t < hd; ++t) orow[t] = v_mean[t];
      continue;
    }
    const double* qrow = q.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double* krow = k.row(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < hd; ++t) acc += qrow[t] * krow[t];
      weights[j] = acc * scale;
    }
    softmax_span_inplace(weights.data(), m);
    for (std::size_t t = 0; t < hd; ++t) orow[t] = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double wj = weights[j];
      const double* vrow = v.row(j);
      for (std::size_t t = 0; t < hd; ++t) orow[t] += wj * vrow[t];
    }
  }
}

// First `count` entries of a seeded Fisher-Yates shuffle of [0, m).
inline std::vector<std::size_t> sample_without_replacement(std::size_t m,
                                                           std::size_t count,
                                                           Rng& rng) {
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(m - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace detail

// Query-sparsity attention: u = factor * ceil(ln n) queries with the most
// peaked score distributions (measured against factor * ceil(ln m) uniformly
// sampled keys) receive full softmax attention; the rest output the mean of V.
inline Matrix probsparse_attention(const AttentionInputs& in, const MechanismConfig& cfg,
                                   Rng& rng,
                                   std::optional<std::size_t> forced_u = std::nullopt) {
  cfg.validate_common();
  if (!check_support(Mechanism::Probsparse, in.pattern)) {
    throw UnsupportedPatternError("probsparse supports ns only");
  }

  const std::size_t n = in.target_len();
  const std::size_t m = in.source_len();
  const std::size_t hd = in.head_dim();

  const auto log_count = [](std::size_t len) {
    return static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(len))));
  };
  const std::size_t sample_count = std::max<std::size_t>(1, std::min(m, cfg.factor * log_count(m)));
  const std::size_t top_u = forced_u ? *forced_u : std::min(n, cfg.factor * log_count(n));

  Matrix out(n, in.dim());
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto sampled = detail::sample_without_replacement(m, sample_count, rng);
    detail::probsparse_head(in.q.col_block(h * hd, hd), in.k.col_block(h * hd, hd),
                            in.v.col_block(h * hd, hd), sampled, top_u,
                            out.col_block(h * hd, hd));
  }
  detail::require_finite(out, "probsparse_attention");
  return out;
}

}  // namespace attnkit
