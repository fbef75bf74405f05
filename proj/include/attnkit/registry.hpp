#pragma once

#include "attnkit/config.hpp"
#include "attnkit/mechanisms/abc.hpp"
#include "attnkit/mechanisms/cosformer.hpp"
#include "attnkit/mechanisms/lara.hpp"
#include "attnkit/mechanisms/local.hpp"
#include "attnkit/mechanisms/longshort.hpp"
#include "attnkit/mechanisms/nystrom.hpp"
#include "attnkit/mechanisms/performer.hpp"
#include "attnkit/mechanisms/probsparse.hpp"
#include "attnkit/mechanisms/s4d.hpp"
#include "attnkit/pattern.hpp"
#include "attnkit/rng.hpp"
#include "attnkit/vanilla.hpp"

namespace attnkit {

// Uniform entry point used by the benchmark, the causality probe and the
// CLI. Mechanisms that sample draw from a generator freshly seeded with
// cfg.seed, so a call is a pure function of (mechanism, inputs, config).
inline Matrix apply_mechanism(Mechanism mech, const AttentionInputs& in,
                              const MechanismConfig& cfg) {
  if (!check_support(mech, in.pattern)) {
    throw UnsupportedPatternError(std::string(mechanism_name(mech)) +
                                  " does not support pattern " +
                                  pattern_code(in.pattern));
  }
  switch (mech) {
    case Mechanism::Vanilla: return vanilla_attention(in);
    case Mechanism::Local: return local_attention(in, cfg);
    case Mechanism::Nystrom: return nystrom_attention(in, cfg);
    case Mechanism::Cosformer: return cosformer_attention(in, cfg);
    case Mechanism::Abc: return abc_attention(in, cfg);
    case Mechanism::Longshort: return longshort_attention(in, cfg);
    case Mechanism::S4d: return s4d_attention(in, cfg);
    case Mechanism::Performer: {
      Rng rng(cfg.seed);
      return performer_attention(in, cfg, rng);
    }
    case Mechanism::Lara: {
      Rng rng(cfg.seed);
      return lara_attention(in, cfg, rng);
    }
    case Mechanism::Probsparse: {
      Rng rng(cfg.seed);
      return probsparse_attention(in, cfg, rng);
    }
  }
  throw ConfigError("unknown mechanism");
}

}  // namespace attnkit
