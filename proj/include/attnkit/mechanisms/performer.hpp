#pragma once

#include <cmath>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

namespace detail {

// Positive random-feature estimator shared by performer and lara.
//
// phi(x) = exp(W x - 0.5 ||x||^2 1_R) evaluated on inputs pre-scaled by
// `input_scale`, so that phi(q)^T phi(k) estimates exp(q.k * input_scale^2).
// With per-feature weights rho (empty means all ones):
//
//   out_i = (rho o phi(q_i))^T M / max((rho o phi(q_i)) . z, eps)
//
// where M = sum_j phi(k_j) v_j^T and z = sum_j phi(k_j). The normalization
// constant 1/R cancels between numerator and denominator and is omitted.
inline void random_feature_attention_head(ConstMatrixView q, ConstMatrixView k,
                                          ConstMatrixView v, const Matrix& w,
                                          const std::vector<double>& rho,
                                          double input_scale, double eps,
                                          MutMatrixView out) {
  const std::size_t feats = w.rows();
  const std::size_t hd = w.cols();
  const double half_s2 = 0.5 * input_scale * input_scale;

  Matrix phi_k(k.rows, feats);
  for (std::size_t j = 0; j < k.rows; ++j) {
    const double* krow = k.row(j);
    double sq = 0.0;
    for (std::size_t t = 0; t < hd; ++t) sq += krow[t] * krow[t];
    const double offset = half_s2 * sq;
    double* frow = phi_k.row(j);
    for (std::size_t f = 0; f < feats; ++f) {
      const double* wrow = w.row(f);
      double proj = 0.0;
      for (std::size_t t = 0; t < hd; ++t) proj += wrow[t] * krow[t];
      frow[f] = std::exp(proj * input_scale - offset);
    }
  }

  Matrix moment = matmul_tn(phi_k, v);  // feats x hd
  std::vector<double> z(feats, 0.0);
  for (std::size_t j = 0; j < k.rows; ++j) {
    const double* frow = phi_k.row(j);
    for (std::size_t f = 0; f < feats; ++f) z[f] += frow[f];
  }

  std::vector<double> fq(feats);
  for (std::size_t i = 0; i < q.rows; ++i) {
    const double* qrow = q.row(i);
    double sq = 0.0;
    for (std::size_t t = 0; t < hd; ++t) sq += qrow[t] * qrow[t];
    const double offset = half_s2 * sq;
    for (std::size_t f = 0; f < feats; ++f) {
      const double* wrow = w.row(f);
      double proj = 0.0;
      for (std::size_t t = 0; t < hd; ++t) proj += wrow[t] * qrow[t];
      fq[f] = std::exp(proj * input_scale - offset);
      if (!rho.empty()) fq[f] *= rho[f];
    }

    double den = 0.0;
    for (std::size_t f = 0; f < feats; ++f) den += fq[f] * z[f];
    den = std::max(den, eps);

    double* orow = out.row(i);
    for (std::size_t t = 0; t < hd; ++t) orow[t] = 0.0;
    for (std::size_t f = 0; f < feats; ++f) {
      const double ff = fq[f];
      const double* mrow = moment.row(f);
      for (std::size_t t = 0; t < hd; ++t) orow[t] += ff * mrow[t];
    }
    const double inv = 1.0 / den;
    for (std::size_t t = 0; t < hd; ++t) orow[t] *= inv;
  }
}

}  // namespace detail

// Softmax-kernel approximation through positive random features, with the
// projection rows drawn i.i.d. from the standard Gaussian. Queries and keys
// are pre-scaled by head_dim^(-1/4) so the estimated kernel matches the
// scaled scores of dense attention. Causal cross is computed identically to
// noncausal cross: the per-query map never looks at other queries, so
// restricting query visibility changes nothing.
inline Matrix performer_attention(const AttentionInputs& in, const MechanismConfig& cfg,
                                  Rng& rng) {
  cfg.validate_common();
  if (!check_support(Mechanism::Performer, in.pattern)) {
    throw UnsupportedPatternError("performer supports ns, nc, cc (causal self excluded)");
  }
  if (cfg.feature_dim < 1) throw ConfigError("performer requires feature_dim >= 1");

  const std::size_t hd = in.head_dim();
  const double input_scale = 1.0 / std::sqrt(std::sqrt(static_cast<double>(hd)));

  Matrix out(in.target_len(), in.dim());
  const std::vector<double> unit_weights;
  for (std::size_t h = 0; h < in.heads; ++h) {
    Matrix w = gaussian_matrix(rng, cfg.feature_dim, hd);
    detail::random_feature_attention_head(
        in.q.col_block(h * hd, hd), in.k.col_block(h * hd, hd),
        in.v.col_block(h * hd, hd), w, unit_weights, input_scale, cfg.epsilon,
        out.col_block(h * hd, hd));
  }
  detail::require_finite(out, "performer_attention");
  return out;
}

}  // namespace attnkit
