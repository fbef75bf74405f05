#pragma once

#include <cmath>
#include <vector>

#include "attnkit/config.hpp"
#include "attnkit/matrix.hpp"
#include "attnkit/mechanisms/nystrom.hpp"
#include "attnkit/mechanisms/performer.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

// Random-feature attention with multiple adaptive proposals. The feature
// rows are drawn from C Gaussian proposals N(mu_c, I), where mu_c averages
// the c-th segment-mean landmarks of the (pre-scaled) queries and keys. Each
// feature carries a mixture importance ratio
//
//   rho_t = N(w_t; 0, I) / ( (1/C) sum_c N(w_t; mu_c, I) )
//
// entering the estimator as the diagonal reweighting of the feature space;
// the shared denominator then self-normalizes the key weights to sum to one.
// With a single proposal pinned at the standard Gaussian this collapses to
// rho = 1 and reproduces performer exactly.
inline Matrix lara_attention(const AttentionInputs& in, const MechanismConfig& cfg,
                             Rng& rng) {
  cfg.validate_common();
  if (!check_support(Mechanism::Lara, in.pattern)) {
    throw UnsupportedPatternError("lara supports ns only");
  }
  const std::size_t proposals = cfg.landmarks;
  const std::size_t feats = cfg.feature_dim;
  if (proposals < 1) throw ConfigError("lara requires landmarks >= 1");
  if (feats < 1) throw ConfigError("lara requires feature_dim >= 1");
  if (proposals > in.target_len()) {
    throw ConfigError("lara requires landmarks <= sequence length");
  }

  const std::size_t hd = in.head_dim();
  const double input_scale = 1.0 / std::sqrt(std::sqrt(static_cast<double>(hd)));
  const double log_c = std::log(static_cast<double>(proposals));

  Matrix out(in.target_len(), in.dim());
  for (std::size_t h = 0; h < in.heads; ++h) {
    const auto qh = in.q.col_block(h * hd, hd);
    const auto kh = in.k.col_block(h * hd, hd);

    Matrix mu(proposals, hd);
    if (!cfg.lara_standard_proposals) {
      Matrix q_land = detail::segment_means(qh, proposals);
      Matrix k_land = detail::segment_means(kh, proposals);
      for (std::size_t c = 0; c < proposals; ++c) {
        for (std::size_t t = 0; t < hd; ++t) {
          mu(c, t) = 0.5 * (q_land(c, t) + k_land(c, t)) * input_scale;
        }
      }
    }

    // Feature t is assigned to proposal c(t) by the same near-equal
    // segmentation used for landmarks.
    Matrix w = gaussian_matrix(rng, feats, hd);
    std::vector<std::size_t> owner(feats);
    for (std::size_t c = 0; c < proposals; ++c) {
      const std::size_t lo = detail::segment_start(c, feats, proposals);
      const std::size_t hi = detail::segment_start(c + 1, feats, proposals);
      for (std::size_t t = lo; t < hi; ++t) owner[t] = c;
    }
    for (std::size_t t = 0; t < feats; ++t) {
      const double* murow = mu.row(owner[t]);
      double* wrow = w.row(t);
      for (std::size_t j = 0; j < hd; ++j) wrow[j] += murow[j];
    }

    auto sq_dist = [&](const double* x, const double* center) {
      double acc = 0.0;
      for (std::size_t j = 0; j < hd; ++j) {
        const double d = x[j] - center[j];
        acc += d * d;
      }
      return acc;
    };
    const std::vector<double> origin(hd, 0.0);

    std::vector<double> rho(feats);
    std::vector<double> logs(proposals);
    for (std::size_t t = 0; t < feats; ++t) {
      const double* wrow = w.row(t);
      const double log_target = -0.5 * sq_dist(wrow, origin.data());
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < proposals; ++c) {
        logs[c] = -0.5 * sq_dist(wrow, mu.row(c));
        mx = std::max(mx, logs[c]);
      }
      double sum = 0.0;
      for (std::size_t c = 0; c < proposals; ++c) sum += std::exp(logs[c] - mx);
      const double log_mixture = mx + std::log(sum) - log_c;
      rho[t] = std::exp(log_target - log_mixture);
    }

    detail::random_feature_attention_head(qh, kh, in.v.col_block(h * hd, hd), w,
                                          rho, input_scale, cfg.epsilon,
                                          out.col_block(h * hd, hd));
  }
  detail::require_finite(out, "lara_attention");
  return out;
}

}  // namespace attnkit
