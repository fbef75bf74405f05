#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"

namespace attnkit {

// ReLU-kernel attention with cosine position reweighting. The quadratic form
// scores position pair (i, j) as relu(q_i).relu(k_j) * cos(pi (i-j) / 2L)
// with L = max(n, m); splitting the cosine of the difference into
// cos*cos + sin*sin turns it into two linear-time feature passes:
//
//   out_i = (qc_i^T Mc + qs_i^T Ms) / max(qc_i.zc + qs_i.zs, eps)
//
// where qc_i = relu(q_i) cos(pi i / 2L), Mc = sum_j kc_j v_j^T, and so on.
// A query whose ReLU features are all zero hits the eps floor and yields a
// zero output row.
inline Matrix cosformer_attention(const AttentionInputs& in, const MechanismConfig& cfg) {
  cfg.validate_common();
  if (!check_support(Mechanism::Cosformer, in.pattern)) {
    throw UnsupportedPatternError("cosformer supports ns and nc only");
  }

  const std::size_t n = in.target_len();
  const std::size_t m = in.source_len();
  const std::size_t hd = in.head_dim();
  const double len_scale =
      std::numbers::pi / (2.0 * static_cast<double>(std::max(n, m)));

  Matrix out(n, in.dim());
  std::vector<double> kc(hd), ks(hd), qc(hd), qs(hd);
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto qh = in.q.col_block(h * hd, hd);
    const auto kh = in.k.col_block(h * hd, hd);
    const auto vh = in.v.col_block(h * hd, hd);
    auto oh = out.col_block(h * hd, hd);

    Matrix moment_cos(hd, hd), moment_sin(hd, hd);
    std::vector<double> z_cos(hd, 0.0), z_sin(hd, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double cj = std::cos(len_scale * static_cast<double>(j));
      const double sj = std::sin(len_scale * static_cast<double>(j));
      const double* krow = kh.row(j);
      const double* vrow = vh.row(j);
      for (std::size_t t = 0; t < hd; ++t) {
        const double rk = std::max(krow[t], 0.0);
        kc[t] = rk * cj;
        ks[t] = rk * sj;
        z_cos[t] += kc[t];
        z_sin[t] += ks[t];
      }
      for (std::size_t t = 0; t < hd; ++t) {
        double* mc = moment_cos.row(t);
        double* ms = moment_sin.row(t);
        const double kct = kc[t];
        const double kst = ks[t];
        for (std::size_t u = 0; u < hd; ++u) {
          mc[u] += kct * vrow[u];
          ms[u] += kst * vrow[u];
        }
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double ci = std::cos(len_scale * static_cast<double>(i));
      const double si = std::sin(len_scale * static_cast<double>(i));
      const double* qrow = qh.row(i);
      double den = 0.0;
      for (std::size_t t = 0; t < hd; ++t) {
        const double rq = std::max(qrow[t], 0.0);
        qc[t] = rq * ci;
        qs[t] = rq * si;
        den += qc[t] * z_cos[t] + qs[t] * z_sin[t];
      }
      den = std::max(den, cfg.epsilon);

      double* orow = oh.row(i);
      for (std::size_t u = 0; u < hd; ++u) orow[u] = 0.0;
      for (std::size_t t = 0; t < hd; ++t) {
        const double* mc = moment_cos.row(t);
        const double* ms = moment_sin.row(t);
        const double qct = qc[t];
        const double qst = qs[t];
        for (std::size_t u = 0; u < hd; ++u) orow[u] += qct * mc[u] + qst * ms[u];
      }
      const double inv = 1.0 / den;
      for (std::size_t u = 0; u < hd; ++u) orow[u] *= inv;
    }
  }
  detail::require_finite(out, "cosformer_attention");
  return out;
}

}  // namespace attnkit
