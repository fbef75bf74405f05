#pragma once

#include <cstdint>

#include "attnkit/errors.hpp"
#include "attnkit/pinv.hpp"

namespace attnkit {

// Shared hyperparameters for the efficient mechanisms. Defaults follow the
// efficiency-measurement settings: window 16, 16 landmarks / memory slots,
// 16 random features, sampling factor 5, state dimension 16.
struct MechanismConfig {
  std::size_t window = 16;       // local, longshort
  std::size_t landmarks = 16;    // nystrom, abc, lara, longshort (0 allowed for longshort)
  std::size_t feature_dim = 16;  // performer / lara random-feature count
  std::size_t factor = 5;        // probsparse sampling factor
  std::size_t state_dim = 16;    // s4d state size per channel
  std::size_t pinv_iters = kDefaultPinvIters;
  double epsilon = 1e-6;         // denominator floor for kernelized forms
  std::uint64_t seed = 42;

  // Diagnostic switch: forces lara proposals to the standard Gaussian so the
  // single-proposal case reduces to performer exactly.
  bool lara_standard_proposals = false;

  void validate_common() const {
    if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
    if (factor == 0) throw ConfigError("factor must be >= 1");
  }
};

}  // namespace attnkit
