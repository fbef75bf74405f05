#pragma once

#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attnkit/oracles.hpp"
#include "attnkit/probe.hpp"
#include "attnkit/registry.hpp"

namespace attnkit {

struct CheckResult {
  std::string group;
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace verify_detail {

inline std::string err_detail(double measured, double tolerance) {
  std::ostringstream out;
  out << std::scientific << std::setprecision(3) << "max_err=" << measured
      << " tol=" << tolerance;
  return out.str();
}

inline AttentionInputs random_inputs(Rng& rng, std::size_t n, std::size_t m,
                                     std::size_t d, std::size_t heads,
                                     AttentionPattern pattern) {
  return AttentionInputs::make(gaussian_matrix(rng, n, d), gaussian_matrix(rng, m, d),
                               gaussian_matrix(rng, m, d), pattern, heads);
}

inline AttentionInputs constant_value_inputs(Rng& rng, std::size_t n, std::size_t d,
                                             std::size_t heads, AttentionPattern pattern) {
  Matrix v(n, d);
  std::vector<double> c(d);
  for (std::size_t j = 0; j < d; ++j) c[j] = rng.next_gaussian();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) v(i, j) = c[j];
  }
  return AttentionInputs::make(gaussian_matrix(rng, n, d), gaussian_matrix(rng, n, d),
                               std::move(v), pattern, heads);
}

// Max deviation of output rows from the constant value rows.
inline double constant_value_deviation(Mechanism mech, const MechanismConfig& cfg,
                                       const AttentionInputs& in) {
  const Matrix out = apply_mechanism(mech, in, cfg);
  double dev = 0.0;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      dev = std::max(dev, std::abs(out(i, j) - in.v(0, j)));
    }
  }
  return dev;
}

inline double median_rel_error(const Matrix& approx, const Matrix& exact) {
  std::vector<double> errs;
  errs.reserve(exact.size());
  for (std::size_t i = 0; i < exact.rows(); ++i) {
    for (std::size_t j = 0; j < exact.cols(); ++j) {
      errs.push_back(std::abs(approx(i, j) - exact(i, j)) /
                     std::max(std::abs(exact(i, j)), 1e-12));
    }
  }
  std::sort(errs.begin(), errs.end());
  const std::size_t n = errs.size();
  return n % 2 == 1 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
}

}  // namespace verify_detail

// Deterministic oracle/invariant suite behind `verify`. Every check derives
// its data from the given seed only, so two runs with the same seed print
// byte-identical reports.
inline std::vector<CheckResult> run_verification(const std::optional<Mechanism>& only,
                                                 std::uint64_t seed) {
  namespace vd = verify_detail;
  std::vector<CheckResult> results;

  const auto add = [&](const std::string& group, const std::string& name,
                       double measured, double tol) {
    results.push_back({group, name, measured <= tol, vd::err_detail(measured, tol)});
  };
  const auto wants = [&](Mechanism m) { return !only || *only == m; };
  const auto cfg_with_seed = [&](std::uint64_t s) {
    MechanismConfig cfg;
    cfg.seed = s;
    return cfg;
  };

  // --- core numeric substrate (runs in full suite mode) ---
  if (!only) {
    {
      Rng rng(seed);
      double worst = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        Matrix rows = gaussian_matrix(rng, 4, 8);
        scale_inplace(rows.view(), trial % 2 == 0 ? 1e4 : 1.0);
        Matrix p = softmax_rows(rows);
        for (std::size_t i = 0; i < p.rows(); ++i) {
          double sum = 0.0;
          for (std::size_t j = 0; j < p.cols(); ++j) sum += p(i, j);
          worst = std::max(worst, std::abs(sum - 1.0));
        }
      }
      add("core", "softmax rows sum to one", worst, 1e-12);
    }
    {
      Rng rng(seed + 1);
      double worst = 0.0;
      for (std::size_t n : {16u, 64u, 256u}) {
        std::vector<double> kern(n), u(n);
        for (auto& x : kern) x = rng.next_gaussian();
        for (auto& x : u) x = rng.next_gaussian();
        const auto fast = conv_fft(kern, u);
        const auto slow = oracles::convolve_direct(kern, u);
        double scale = 0.0;
        for (double x : slow) scale = std::max(scale, std::abs(x));
        for (std::size_t t = 0; t < n; ++t) {
          worst = std::max(worst, std::abs(fast[t] - slow[t]) / std::max(scale, 1.0));
        }
      }
      add("core", "fft convolution matches direct", worst, 1e-10);
    }
    {
      Rng rng(seed + 2);
      Matrix a(8, 8);
      for (std::size_t i = 0; i < 8; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
          a(i, j) = 0.05 + rng.next_uniform();
          sum += a(i, j);
        }
        for (std::size_t j = 0; j < 8; ++j) a(i, j) /= sum;
        a(i, i) += 0.5;  // keep it comfortably invertible
        for (std::size_t j = 0; j < 8; ++j) a(i, j) /= 1.5;
      }
      const PinvResult pinv = pinv_iterative(a);
      add("core", "pinv penrose residual", pinv.penrose_residual, 1e-3);
    }
    {
      Rng a(seed + 3), b(seed + 3), c(seed + 4);
      Matrix ma = gaussian_matrix(a, 16, 16);
      Matrix mb = gaussian_matrix(b, 16, 16);
      Matrix mc = gaussian_matrix(c, 16, 16);
      const double same = max_abs_diff(ma, mb);
      const double diff = max_abs_diff(ma, mc);
      results.push_back({"core", "rng determinism per seed", same == 0.0 && diff > 0.0,
                         vd::err_detail(same, 0.0)});
    }
  }

  // --- vanilla ---
  if (wants(Mechanism::Vanilla)) {
    const MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 10);
      double worst = 0.0;
      for (AttentionPattern p : all_patterns()) {
        const std::size_t n = 12, m = is_self(p) ? 12 : 7;
        const auto in = vd::random_inputs(rng, n, m, 8, 2, p);
        worst = std::max(worst, max_abs_diff(vanilla_attention(in),
                                             oracles::dense_attention_reference(in)));
      }
      add("vanilla", "matches dense reference on all patterns", worst, 1e-12);
    }
    {
      Rng rng(seed + 11);
      const auto in = vd::constant_value_inputs(rng, 16, 8, 2, AttentionPattern::NoncausalSelf);
      add("vanilla", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Vanilla, cfg, in), 1e-12);
    }
    {
      Rng rng(seed + 12);
      double worst = 0.0;
      for (AttentionPattern p : {AttentionPattern::CausalSelf, AttentionPattern::CausalCross}) {
        const auto in = vd::random_inputs(rng, 16, 16, 8, 2, p);
        Rng probe_rng(seed + 13);
        worst = std::max(worst, causality_probe(Mechanism::Vanilla, cfg, in, 5, probe_rng));
      }
      add("vanilla", "causal patterns ignore the future", worst, 1e-10);
    }
    {
      Rng rng(seed + 14);
      const auto in = vd::random_inputs(rng, 4, 4, 4, 1, AttentionPattern::NoncausalSelf);
      Rng probe_rng(seed + 15);
      const double dev = causality_probe(Mechanism::Vanilla, cfg, in, 0, probe_rng);
      results.push_back({"vanilla", "noncausal probe sees the future (negative control)",
                         dev > 0.0, vd::err_detail(dev, 0.0)});
    }
  }

  // --- local ---
  if (wants(Mechanism::Local)) {
    MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 20);
      const auto in = vd::random_inputs(rng, 16, 16, 8, 2, AttentionPattern::NoncausalSelf);
      cfg.window = 64;  // >= 2n: the window covers everything
      add("local", "full window equals dense attention",
          max_abs_diff(local_attention(in, cfg), oracles::dense_attention_reference(in)),
          1e-12);
    }
    {
      Rng rng(seed + 21);
      const auto in = vd::random_inputs(rng, 12, 12, 4, 1, AttentionPattern::CausalSelf);
      cfg.window = 1;  // half-window 0: each token sees itself only
      add("local", "window of one returns values",
          max_abs_diff(local_attention(in, cfg), in.v), 1e-12);
    }
    {
      Rng rng(seed + 22);
      cfg.window = 8;
      const auto in = vd::random_inputs(rng, 32, 32, 8, 2, AttentionPattern::CausalSelf);
      Rng probe_rng(seed + 23);
      add("local", "causal self ignores the future",
          causality_probe(Mechanism::Local, cfg, in, 9, probe_rng), 1e-10);
    }
    {
      Rng rng(seed + 24);
      cfg.window = 8;
      const auto in = vd::constant_value_inputs(rng, 24, 8, 2, AttentionPattern::NoncausalSelf);
      add("local", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Local, cfg, in), 1e-12);
    }
  }

  // --- nystrom ---
  if (wants(Mechanism::Nystrom)) {
    MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 30);
      const auto in = vd::random_inputs(rng, 24, 24, 8, 2, AttentionPattern::NoncausalSelf);
      cfg.landmarks = 24;  // every token is its own landmark
      add("nystrom", "full landmarks match dense attention",
          max_abs_diff(nystrom_attention(in, cfg), oracles::dense_attention_reference(in)),
          1e-3);
    }
    {
      Matrix x(4, 3);
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = static_cast<double>(i * 3 + j);
      }
      const Matrix means = detail::segment_means(x, 2);
      double worst = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        worst = std::max(worst, std::abs(means(0, j) - 0.5 * (x(0, j) + x(1, j))));
        worst = std::max(worst, std::abs(means(1, j) - 0.5 * (x(2, j) + x(3, j))));
      }
      add("nystrom", "segment means average contiguous chunks", worst, 0.0);
    }
    {
      Rng rng(seed + 31);
      cfg.landmarks = 8;
      const auto in = vd::constant_value_inputs(rng, 32, 8, 2, AttentionPattern::NoncausalSelf);
      add("nystrom", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Nystrom, cfg, in), 1e-3);
    }
  }

  // --- performer ---
  if (wants(Mechanism::Performer)) {
    MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 40);
      const auto in = vd::constant_value_inputs(rng, 16, 8, 2, AttentionPattern::NoncausalSelf);
      add("performer", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Performer, cfg, in), 1e-10);
    }
    {
      Rng rng(seed + 41);
      auto nc = vd::random_inputs(rng, 10, 14, 8, 2, AttentionPattern::NoncausalCross);
      AttentionInputs cc;
      cc.q = nc.q;
      cc.k = nc.k;
      cc.v = nc.v;
      cc.pattern = AttentionPattern::CausalCross;
      cc.heads = nc.heads;
      add("performer", "causal cross equals noncausal cross",
          max_abs_diff(apply_mechanism(Mechanism::Performer, nc, cfg),
                       apply_mechanism(Mechanism::Performer, cc, cfg)),
          0.0);
    }
    {
      Rng rng(seed + 42);
      AttentionInputs in = vd::random_inputs(rng, 16, 16, 4, 1, AttentionPattern::NoncausalSelf);
      for (Matrix* m : {&in.q, &in.k}) {
        for (std::size_t i = 0; i < m->rows(); ++i) {
          double norm = 0.0;
          for (std::size_t j = 0; j < m->cols(); ++j) norm += (*m)(i, j) * (*m)(i, j);
          norm = std::sqrt(norm);
          if (norm > 1.0) {
            for (std::size_t j = 0; j < m->cols(); ++j) (*m)(i, j) /= norm;
          }
        }
      }
      const Matrix exact = oracles::dense_attention_reference(in);
      cfg.feature_dim = 64;
      const double coarse = vd::median_rel_error(apply_mechanism(Mechanism::Performer, in, cfg), exact);
      cfg.feature_dim = 4096;
      const double fine = vd::median_rel_error(apply_mechanism(Mechanism::Performer, in, cfg), exact);
      results.push_back({"performer", "error shrinks with more features",
                         fine < coarse && fine < 0.05, vd::err_detail(fine, 0.05)});
    }
  }

  // --- lara ---
  if (wants(Mechanism::Lara)) {
    MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 50);
      const auto in = vd::random_inputs(rng, 24, 24, 8, 2, AttentionPattern::NoncausalSelf);
      cfg.landmarks = 1;
      cfg.lara_standard_proposals = true;
      Rng r1(seed + 51), r2(seed + 51);
      const Matrix as_lara = lara_attention(in, cfg, r1);
      const Matrix as_performer = performer_attention(in, cfg, r2);
      add("lara", "single standard proposal reduces to performer",
          max_abs_diff(as_lara, as_performer), 0.0);
    }
    {
      Rng rng(seed + 52);
      const auto in = vd::constant_value_inputs(rng, 32, 8, 2, AttentionPattern::NoncausalSelf);
      add("lara", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Lara, cfg_with_seed(seed), in), 1e-10);
    }
    {
      Rng rng(seed + 53);
      const auto in = vd::random_inputs(rng, 32, 32, 8, 2, AttentionPattern::NoncausalSelf);
      const Matrix out = apply_mechanism(Mechanism::Lara, in, cfg_with_seed(seed));
      results.push_back({"lara", "finite output of the right shape",
                         out.rows() == 32 && out.cols() == 8 && out.all_finite(),
                         "shape+finite"});
    }
  }

  // --- cosformer ---
  if (wants(Mechanism::Cosformer)) {
    const MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 60);
      double worst = 0.0;
      const std::pair<std::size_t, std::size_t> sizes[] = {{1, 1}, {5, 9}, {12, 12}, {33, 17}};
      for (auto [n, m] : sizes) {
        const auto pattern = n == m ? AttentionPattern::NoncausalSelf
                                    : AttentionPattern::NoncausalCross;
        const auto in = vd::random_inputs(rng, n, m, 8, 2, pattern);
        worst = std::max(worst,
                         max_abs_diff(cosformer_attention(in, cfg),
                                      oracles::cosformer_quadratic_reference(in, cfg.epsilon)));
      }
      add("cosformer", "linear form equals quadratic reweighting", worst, 1e-10);
    }
    {
      Rng rng(seed + 61);
      AttentionInputs in = vd::random_inputs(rng, 1, 1, 6, 1, AttentionPattern::NoncausalSelf);
      for (std::size_t j = 0; j < 6; ++j) {
        in.q(0, j) = std::abs(in.q(0, j)) + 0.1;
        in.k(0, j) = std::abs(in.k(0, j)) + 0.1;
      }
      add("cosformer", "single token returns its value",
          max_abs_diff(cosformer_attention(in, cfg), in.v), 1e-12);
    }
    {
      Rng rng(seed + 62);
      auto in = vd::constant_value_inputs(rng, 20, 8, 2, AttentionPattern::NoncausalSelf);
      // the identity needs at least one surviving ReLU feature per row and head
      for (std::size_t i = 0; i < in.q.rows(); ++i) {
        for (std::size_t col : {0u, 4u}) {
          in.q(i, col) = std::abs(in.q(i, col)) + 0.2;
          in.k(i, col) = std::abs(in.k(i, col)) + 0.2;
        }
      }
      add("cosformer", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Cosformer, cfg, in), 1e-10);
    }
  }

  // --- longshort ---
  if (wants(Mechanism::Longshort)) {
    MechanismConfig cfg = cfg_with_seed(seed);
    cfg.window = 8;
    {
      Rng rng(seed + 70);
      MechanismConfig nolong = cfg;
      nolong.landmarks = 0;
      double worst = 0.0;
      for (AttentionPattern p : {AttentionPattern::NoncausalSelf, AttentionPattern::CausalSelf}) {
        const auto in = vd::random_inputs(rng, 40, 40, 8, 2, p);
        worst = std::max(worst, max_abs_diff(longshort_attention(in, nolong),
                                             oracles::longshort_window_reference(in, 8)));
      }
      add("longshort", "short branch alone equals windowed softmax", worst, 1e-12);
    }
    {
      Rng rng(seed + 71);
      const auto in = vd::constant_value_inputs(rng, 32, 8, 2, AttentionPattern::NoncausalSelf);
      add("longshort", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Longshort, cfg, in), 1e-10);
    }
    {
      Rng rng(seed + 72);
      const auto in = vd::random_inputs(rng, 32, 32, 8, 2, AttentionPattern::CausalSelf);
      Rng probe_rng(seed + 73);
      add("longshort", "causal self ignores the future",
          causality_probe(Mechanism::Longshort, cfg, in, 11, probe_rng), 1e-10);
    }
    {
      Rng rng(seed + 74);
      auto ns = vd::random_inputs(rng, 32, 32, 8, 2, AttentionPattern::NoncausalSelf);
      AttentionInputs cs;
      cs.q = ns.q;
      cs.k = ns.k;
      cs.v = ns.v;
      cs.pattern = AttentionPattern::CausalSelf;
      cs.heads = ns.heads;
      const Matrix a = longshort_attention(ns, cfg);
      const Matrix b = longshort_attention(cs, cfg);
      double worst = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j) {
        worst = std::max(worst, std::abs(a(31, j) - b(31, j)));
      }
      add("longshort", "causal final position equals noncausal", worst, 1e-10);
    }
  }

  // --- probsparse ---
  if (wants(Mechanism::Probsparse)) {
    MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 80);
      const auto in = vd::random_inputs(rng, 16, 16, 8, 2, AttentionPattern::NoncausalSelf);
      cfg.factor = 16;  // u = factor * ceil(ln n) >= n: every query selected
      Rng mech_rng(seed + 81);
      add("probsparse", "selecting every query equals dense attention",
          max_abs_diff(probsparse_attention(in, cfg, mech_rng),
                       oracles::dense_attention_reference(in)),
          1e-12);
    }
    {
      Rng rng(seed + 82);
      const auto in = vd::random_inputs(rng, 12, 12, 4, 1, AttentionPattern::NoncausalSelf);
      Rng mech_rng(seed + 83);
      const Matrix out = probsparse_attention(in, cfg_with_seed(seed), mech_rng, 0);
      double worst = 0.0;
      for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 12; ++i) mean += in.v(i, j);
        mean /= 12.0;
        for (std::size_t i = 0; i < 12; ++i) worst = std::max(worst, std::abs(out(i, j) - mean));
      }
      add("probsparse", "zero selection returns the value mean", worst, 1e-12);
    }
    {
      Rng rng(seed + 84);
      const auto in = vd::constant_value_inputs(rng, 24, 8, 2, AttentionPattern::NoncausalSelf);
      add("probsparse", "constant values preserved",
          vd::constant_value_deviation(Mechanism::Probsparse, cfg_with_seed(seed), in), 1e-12);
    }
  }

  // --- abc ---
  if (wants(Mechanism::Abc)) {
    const MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 90);
      double worst = 0.0;
      for (AttentionPattern p : all_patterns()) {
        const auto in = vd::constant_value_inputs(rng, 20, 8, 2, p);
        worst = std::max(worst, vd::constant_value_deviation(Mechanism::Abc, cfg, in));
      }
      add("abc", "constant values preserved on every pattern", worst, 1e-10);
    }
    {
      Rng rng(seed + 91);
      auto ns = vd::random_inputs(rng, 24, 24, 8, 2, AttentionPattern::NoncausalSelf);
      AttentionInputs cs;
      cs.q = ns.q;
      cs.k = ns.k;
      cs.v = ns.v;
      cs.pattern = AttentionPattern::CausalSelf;
      cs.heads = ns.heads;
      const Matrix a = abc_attention(ns, cfg);
      const Matrix b = abc_attention(cs, cfg);
      double worst = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j) {
        worst = std::max(worst, std::abs(a(23, j) - b(23, j)));
      }
      add("abc", "causal final position equals noncausal", worst, 1e-10);
    }
    {
      Rng rng(seed + 92);
      double worst = 0.0;
      for (AttentionPattern p : {AttentionPattern::CausalSelf, AttentionPattern::CausalCross}) {
        const auto in = vd::random_inputs(rng, 24, 24, 8, 2, p);
        Rng probe_rng(seed + 93);
        worst = std::max(worst, causality_probe(Mechanism::Abc, cfg, in, 7, probe_rng));
      }
      add("abc", "causal patterns ignore the future", worst, 1e-10);
    }
  }

  // --- s4d ---
  if (wants(Mechanism::S4d)) {
    const MechanismConfig cfg = cfg_with_seed(seed);
    {
      Rng rng(seed + 100);
      Matrix u = gaussian_matrix(rng, 64, 4);
      Rng prng(seed + 101);
      const S4DParams params = S4DParams::init(4, 16, prng);
      double worst = 0.0;
      for (AttentionPattern p : {AttentionPattern::NoncausalSelf, AttentionPattern::CausalSelf}) {
        worst = std::max(worst, max_abs_diff(s4d_layer(u, params, p),
                                             oracles::s4d_recurrence_reference(u, params, p)));
      }
      add("s4d", "fft path matches the state recurrence", worst, 1e-8);
    }
    {
      Rng prng(seed + 102);
      S4DParams params = S4DParams::init(1, 8, prng);
      params.d[0] = 0.0;
      Matrix impulse(32, 1);
      impulse(0, 0) = 1.0;
      const Matrix y = s4d_layer(impulse, params, AttentionPattern::CausalSelf);
      const auto kernel = detail::s4d_kernel(params, 0, 32);
      double worst = 0.0;
      for (std::size_t t = 0; t < 32; ++t) worst = std::max(worst, std::abs(y(t, 0) - kernel[t]));
      add("s4d", "impulse response reproduces the kernel", worst, 1e-12);
    }
    {
      Rng rng(seed + 103);
      const auto in = vd::random_inputs(rng, 32, 32, 8, 2, AttentionPattern::CausalSelf);
      Rng probe_rng(seed + 104);
      add("s4d", "causal self ignores the future",
          causality_probe(Mechanism::S4d, cfg, in, 10, probe_rng), 1e-10);
    }
  }

  return results;
}

inline std::string verification_report(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  std::size_t failed = 0;
  for (const CheckResult& r : results) {
    if (!r.pass) ++failed;
    out << (r.pass ? "[PASS] " : "[FAIL] ") << std::left << std::setw(11) << r.group
        << std::setw(52) << r.name << ' ' << r.detail << '\n';
  }
  out << results.size() << " checks, " << failed << " failed\n";
  return out.str();
}

}  // namespace attnkit
