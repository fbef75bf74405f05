#pragma once

#include <algorithm>

#include "attnkit/registry.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

// Measures how much output rows 0..position move when every input row past
// `position` is replaced with fresh random values. For a correctly causal
// mechanism the deviation is zero (up to library rounding); for noncausal
// patterns this is a diagnostic expected to be positive. Self patterns
// perturb q, k and v together (one shared source); cross patterns perturb
// only the target-side queries, since the full source stays visible.
inline double causality_probe(Mechanism mech, const MechanismConfig& cfg,
                              const AttentionInputs& in, std::size_t position,
                              Rng& rng) {
  if (!check_support(mech, in.pattern)) {
    throw UnsupportedPatternError(std::string(mechanism_name(mech)) +
                                  " does not support pattern " +
                                  pattern_code(in.pattern));
  }
  if (position >= in.target_len()) throw ShapeError("causality_probe: position out of range");

  const Matrix base = apply_mechanism(mech, in, cfg);

  AttentionInputs perturbed;
  perturbed.q = in.q;
  perturbed.k = in.k;
  perturbed.v = in.v;
  perturbed.pattern = in.pattern;
  perturbed.heads = in.heads;

  auto refresh_rows_after = [&](Matrix& m) {
    for (std::size_t i = position + 1; i < m.rows(); ++i) {
      double* row = m.row(i);
      for (std::size_t j = 0; j < m.cols(); ++j) row[j] = rng.next_gaussian();
    }
  };
  refresh_rows_after(perturbed.q);
  if (is_self(in.pattern)) {
    refresh_rows_after(perturbed.k);
    refresh_rows_after(perturbed.v);
  }

  const Matrix probed = apply_mechanism(mech, perturbed, cfg);

  double deviation = 0.0;
  for (std::size_t i = 0; i <= position; ++i) {
    const double* a = base.row(i);
    const double* b = probed.row(i);
    for (std::size_t j = 0; j < base.cols(); ++j) {
      deviation = std::max(deviation, std::abs(a[j] - b[j]));
    }
  }
  return deviation;
}

}  // namespace attnkit
