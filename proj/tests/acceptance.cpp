// Acceptance suite: runs every numbered criterion end to end and prints one
// pass/fail line each. Exits nonzero if any criterion fails.

#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attnkit/bench.hpp"
#include "attnkit/ci.hpp"
#include "attnkit/efflen.hpp"
#include "attnkit/oracles.hpp"
#include "attnkit/probe.hpp"
#include "attnkit/registry.hpp"

using namespace attnkit;

namespace {

struct Failure {
  std::string detail;
};

using CheckFn = std::function<std::optional<Failure>()>;

std::string data_path(const std::string& name) {
  return std::string(ATTNKIT_DATA_DIR) + "/" + name;
}

AttentionInputs random_inputs(Rng& rng, std::size_t n, std::size_t m, std::size_t d,
                              std::size_t heads, AttentionPattern pattern) {
  return AttentionInputs::make(gaussian_matrix(rng, n, d), gaussian_matrix(rng, m, d),
                               gaussian_matrix(rng, m, d), pattern, heads);
}

std::optional<Failure> expect_le(double value, double bound, const std::string& what) {
  if (value <= bound) return std::nullopt;
  std::ostringstream out;
  out << what << ": " << value << " > " << bound;
  return Failure{out.str()};
}

std::optional<Failure> expect_near(double value, double target, double tol,
                                   const std::string& what) {
  if (std::abs(value - target) <= tol) return std::nullopt;
  std::ostringstream out;
  out << what << ": got " << value << ", want " << target << " +/- " << tol;
  return Failure{out.str()};
}

// ---- criterion 1 & 2: scoring machinery against published numbers ----

std::optional<Failure> criterion_ci_reproduction() {
  const auto records = parse_metrics_csv(read_lines(data_path("paper_ns_metrics.csv")));
  const auto stats = parse_stats_csv(read_lines(data_path("paper_ns_stats.csv")));
  auto group = [&](const std::string& model, const std::string& task) {
    std::vector<MetricRecord> out;
    for (const auto& r : records) {
      if (r.model == model && r.task == task) out.push_back(r);
    }
    return out;
  };
  if (auto f = expect_near(task_ci(group("vanilla", "tts"), stats), -0.301, 0.02,
                           "vanilla tts task score")) {
    return f;
  }
  return expect_near(task_ci(group("local", "sum"), stats), 2.617, 0.02,
                     "local sum task score");
}

std::optional<Failure> criterion_stats_reproduction() {
  const auto records = parse_metrics_csv(read_lines(data_path("paper_ns_metrics.csv")));
  const auto published = parse_stats_csv(read_lines(data_path("paper_ns_stats.csv")));
  const auto computed = compute_stats(records, SigmaMode::Sample);
  for (const auto& [key, ms] : published) {
    const auto it = computed.find(key);
    if (it == computed.end()) return Failure{"missing computed stats for " + key.second};
    if (auto f = expect_near(it->second.mu, ms.mu, 0.01, key.second + " mu")) return f;
    if (auto f = expect_near(it->second.sigma, ms.sigma, 0.01, key.second + " sigma")) {
      return f;
    }
  }
  return std::nullopt;
}

// ---- criterion 3: limit-case equivalence with the dense oracle ----

std::optional<Failure> criterion_oracle_equivalence() {
  for (std::size_t n : {8u, 32u, 64u}) {
    for (int trial = 0; trial < 50; ++trial) {
      Rng rng(1000 + 17 * static_cast<std::uint64_t>(n) + trial);
      const auto in = random_inputs(rng, n, n, 16, 1, AttentionPattern::NoncausalSelf);
      const Matrix dense = oracles::dense_attention_reference(in);

      MechanismConfig cfg;
      cfg.seed = 7 + trial;
      cfg.window = 2 * n;
      if (auto f = expect_le(max_abs_diff(local_attention(in, cfg), dense), 1e-12,
                             "local full window, n=" + std::to_string(n))) {
        return f;
      }
      cfg.landmarks = n;
      if (auto f = expect_le(max_abs_diff(nystrom_attention(in, cfg), dense), 1e-3,
                             "nystrom full landmarks, n=" + std::to_string(n))) {
        return f;
      }
      cfg.factor = n;  // u = factor * ceil(ln n) >= n
      Rng mech_rng(cfg.seed);
      if (auto f = expect_le(max_abs_diff(probsparse_attention(in, cfg, mech_rng), dense),
                             1e-12, "probsparse all queries, n=" + std::to_string(n))) {
        return f;
      }
    }
  }
  return std::nullopt;
}

// ---- criterion 4: cosformer linear form vs quadratic reweighting ----

std::optional<Failure> criterion_cosformer_identity() {
  Rng size_rng(2024);
  MechanismConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + size_rng.next_below(64);
    const std::size_t m = 1 + size_rng.next_below(64);
    Rng rng(3000 + trial);
    const auto pattern =
        n == m ? AttentionPattern::NoncausalSelf : AttentionPattern::NoncausalCross;
    const auto in = random_inputs(rng, n, m, 8, 1, pattern);
    const double err = max_abs_diff(cosformer_attention(in, cfg),
                                    oracles::cosformer_quadratic_reference(in, cfg.epsilon));
    if (auto f = expect_le(err, 1e-10,
                           "cosformer n=" + std::to_string(n) + " m=" + std::to_string(m))) {
      return f;
    }
  }
  return std::nullopt;
}

// ---- criterion 5: s4d fft path vs state recurrence ----

std::optional<Failure> criterion_s4d_dual_path() {
  for (std::size_t n : {16u, 64u, 256u}) {
    for (int trial = 0; trial < 5; ++trial) {
      Rng prng(4000 + 11 * static_cast<std::uint64_t>(n) + trial);
      const S4DParams params = S4DParams::init(4, 16, prng);
      Rng urng(5000 + trial);
      const Matrix u = gaussian_matrix(urng, n, 4);
      for (AttentionPattern p :
           {AttentionPattern::NoncausalSelf, AttentionPattern::CausalSelf}) {
        const double err = max_abs_diff(s4d_layer(u, params, p),
                                        oracles::s4d_recurrence_reference(u, params, p));
        if (auto f = expect_le(err, 1e-8, std::string("s4d ") + pattern_code(p) +
                                              " n=" + std::to_string(n))) {
          return f;
        }
      }
    }
  }
  return std::nullopt;
}

// ---- criterion 6: causality across every supported causal pair ----

std::optional<Failure> criterion_causality() {
  MechanismConfig cfg;
  cfg.seed = 11;
  for (Mechanism mech : all_mechanisms()) {
    for (AttentionPattern pattern :
         {AttentionPattern::CausalSelf, AttentionPattern::CausalCross}) {
      if (!check_support(mech, pattern)) continue;
      for (std::size_t n : {8u, 32u, 128u}) {
        for (int trial = 0; trial < 50; ++trial) {
          Rng rng(6000 + 31 * static_cast<std::uint64_t>(n) + trial);
          const auto in = random_inputs(rng, n, n, 16, 2, pattern);
          const std::size_t position = rng.next_below(n - 1);
          Rng probe_rng(7000 + trial);
          const double dev = causality_probe(mech, cfg, in, position, probe_rng);
          if (auto f = expect_le(dev, 1e-10,
                                 std::string(mechanism_name(mech)) + " " +
                                     pattern_code(pattern) + " n=" + std::to_string(n) +
                                     " i=" + std::to_string(position))) {
            return f;
          }
        }
      }
    }
  }
  return std::nullopt;
}

// ---- criterion 7: performer error decays with feature count ----

std::optional<Failure> criterion_performer_convergence() {
  const std::size_t feature_counts[] = {64, 256, 1024, 4096, 16384};
  std::vector<std::vector<double>> pooled(5);
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(8000 + seed);
    AttentionInputs in = random_inputs(rng, 16, 16, 4, 1, AttentionPattern::NoncausalSelf);
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
    for (std::size_t fi = 0; fi < 5; ++fi) {
      MechanismConfig cfg;
      cfg.feature_dim = feature_counts[fi];
      cfg.seed = 9000 + seed;
      const Matrix approx = apply_mechanism(Mechanism::Performer, in, cfg);
      for (std::size_t i = 0; i < exact.rows(); ++i) {
        for (std::size_t j = 0; j < exact.cols(); ++j) {
          pooled[fi].push_back(std::abs(approx(i, j) - exact(i, j)) /
                               std::max(std::abs(exact(i, j)), 1e-12));
        }
      }
    }
  }
  std::vector<double> medians(5);
  for (std::size_t fi = 0; fi < 5; ++fi) {
    auto& errs = pooled[fi];
    std::sort(errs.begin(), errs.end());
    medians[fi] = errs[errs.size() / 2];
  }
  for (std::size_t fi = 1; fi < 4; ++fi) {
    if (medians[fi] > medians[fi - 1]) {
      std::ostringstream out;
      out << "median error not nonincreasing: r=" << feature_counts[fi] << " gives "
          << medians[fi] << " after " << medians[fi - 1];
      return Failure{out.str()};
    }
  }
  return expect_le(medians[4], 0.05, "median relative error at 16384 features");
}

// ---- criterion 8: support matrix ----

std::optional<Failure> criterion_support_matrix() {
  struct Row {
    Mechanism mech;
    bool ns, cs, nc, cc;
  };
  const Row expected[] = {
      {Mechanism::Vanilla, true, true, true, true},
      {Mechanism::Local, true, true, false, false},
      {Mechanism::Lara, true, false, false, false},
      {Mechanism::Cosformer, true, false, true, false},
      {Mechanism::Performer, true, false, true, true},
      {Mechanism::Nystrom, true, false, false, false},
      {Mechanism::Abc, true, true, true, true},
      {Mechanism::Probsparse, true, false, false, false},
      {Mechanism::Longshort, true, true, false, false},
      {Mechanism::S4d, true, true, false, false},
  };
  for (const Row& row : expected) {
    const bool got[4] = {check_support(row.mech, AttentionPattern::NoncausalSelf),
                         check_support(row.mech, AttentionPattern::CausalSelf),
                         check_support(row.mech, AttentionPattern::NoncausalCross),
                         check_support(row.mech, AttentionPattern::CausalCross)};
    const bool want[4] = {row.ns, row.cs, row.nc, row.cc};
    for (int p = 0; p < 4; ++p) {
      if (got[p] != want[p]) {
        return Failure{std::string("support mismatch for ") + mechanism_name(row.mech)};
      }
    }
  }
  return std::nullopt;
}

// ---- criterion 9: efficiency-length procedure ----

std::optional<Failure> criterion_efflen(const std::vector<BenchRecord>& records) {
  {
    const CurveFit quad{CurveKind::Quadratic, {1.0, 0.0, 0.0}, 1.0};
    const CurveFit lin{CurveKind::Linear, {4.0, 0.0, 0.0}, 1.0};
    const auto el = efficiency_length(quad, lin);
    if (!el.exists || el.length != 4.0) {
      return Failure{"analytic intersection of x^2 and 4x did not return 4"};
    }
  }
  {
    std::vector<CostPoint> points;
    for (double x : {256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0}) {
      points.push_back({x, 2.0 * x * x + 3.0 * x + 1.0});
    }
    const CurveFit fit = fit_curve(points, CurveKind::Quadratic);
    if (auto f = expect_le(std::abs(fit.coef[0] - 2.0) / 2.0, 1e-9, "quadratic a recovery")) {
      return f;
    }
    if (auto f = expect_le(std::abs(fit.coef[1] - 3.0) / 3.0, 1e-9, "quadratic b recovery")) {
      return f;
    }
  }
  {
    Rng rng(10000);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<CostPoint> qp, lp;
      const double a = 0.5 + rng.next_uniform();
      const double e = 100.0 + rng.next_uniform() * 400.0;
      for (double x : {256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0}) {
        qp.push_back({x, a * x * x + 2.0 * x + 5.0});
        lp.push_back({x, e * x + 3.0});
      }
      const double s = 0.25 + rng.next_uniform() * 100.0;
      auto qs = qp;
      auto ls = lp;
      for (auto& p : qs) p.y *= s;
      for (auto& p : ls) p.y *= s;
      const auto el0 = efficiency_length(fit_curve(qp, CurveKind::Quadratic),
                                         fit_curve(lp, CurveKind::Linear));
      const auto el1 = efficiency_length(fit_curve(qs, CurveKind::Quadratic),
                                         fit_curve(ls, CurveKind::Linear));
      if (!el0.exists || !el1.exists) return Failure{"scale equivariance: intersection lost"};
      if (auto f = expect_le(std::abs(el0.length - el1.length),
                             1e-6 * std::max(1.0, el0.length),
                             "scale equivariance of the efficiency length")) {
        return f;
      }
    }
  }

  // end-to-end on this machine's bench records
  std::vector<CostPoint> vanilla_time;
  for (const auto& r : records) {
    if (r.mechanism == Mechanism::Vanilla) {
      vanilla_time.push_back({static_cast<double>(r.length), r.median_time_s});
    }
  }
  const CurveFit quad = fit_curve(vanilla_time, CurveKind::Quadratic);
  if (auto f = expect_le(0.96, quad.r_squared, "vanilla quadratic time fit R^2")) return f;
  for (Mechanism mech : {Mechanism::Abc, Mechanism::Performer, Mechanism::Cosformer}) {
    std::vector<CostPoint> points;
    for (const auto& r : records) {
      if (r.mechanism == mech) points.push_back({static_cast<double>(r.length), r.median_time_s});
    }
    const CurveFit lin = fit_curve(points, CurveKind::Linear);
    if (auto f = expect_le(0.96, lin.r_squared,
                           std::string(mechanism_name(mech)) + " linear time fit R^2")) {
      return f;
    }
    const auto el = efficiency_length(quad, lin);
    if (!el.exists || !(el.length > 0.0) || !std::isfinite(el.length)) {
      std::ostringstream out;
      out << mechanism_name(mech) << " efficiency length not finite positive (exists="
          << el.exists << ", length=" << el.length << ")";
      return Failure{out.str()};
    }
  }
  return std::nullopt;
}

// ---- criterion 10: scaling trends on the small preset ----

std::optional<Failure> criterion_scaling_trends(const std::vector<BenchRecord>& records) {
  auto find = [&](Mechanism m, std::size_t len) -> const BenchRecord* {
    for (const auto& r : records) {
      if (r.mechanism == m && r.length == len) return &r;
    }
    return nullptr;
  };
  const Mechanism linear_mechs[] = {Mechanism::Local,  Mechanism::Lara,
                                    Mechanism::Cosformer, Mechanism::Performer,
                                    Mechanism::Nystrom, Mechanism::Abc,
                                    Mechanism::Longshort};
  for (Mechanism m : linear_mechs) {
    const BenchRecord* lo = find(m, 1024);
    const BenchRecord* hi = find(m, 8192);
    if (!lo || !hi) return Failure{"missing record for ratio trend"};
    if (!(hi->time_ratio < lo->time_ratio)) {
      std::ostringstream out;
      out << mechanism_name(m) << " time ratio did not shrink: " << lo->time_ratio
          << " at 1024 vs " << hi->time_ratio << " at 8192";
      return Failure{out.str()};
    }
  }
  for (std::size_t len : {1024u, 2048u, 4096u}) {
    const BenchRecord* lo = find(Mechanism::Vanilla, len);
    const BenchRecord* hi = find(Mechanism::Vanilla, 2 * len);
    const double ratio = static_cast<double>(hi->peak_bytes) / static_cast<double>(lo->peak_bytes);
    if (ratio < 3.5) {
      std::ostringstream out;
      out << "vanilla peak ratio " << ratio << " at " << len << "->" << 2 * len << " below 3.5";
      return Failure{out.str()};
    }
    for (Mechanism m : {Mechanism::Performer, Mechanism::Abc, Mechanism::Cosformer,
                        Mechanism::Lara, Mechanism::Nystrom}) {
      const BenchRecord* a = find(m, len);
      const BenchRecord* b = find(m, 2 * len);
      const double r = static_cast<double>(b->peak_bytes) / static_cast<double>(a->peak_bytes);
      if (r > 2.5) {
        std::ostringstream out;
        out << mechanism_name(m) << " peak ratio " << r << " at " << len << "->" << 2 * len
            << " above 2.5";
        return Failure{out.str()};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

int main() {
  // One small-preset run shared by criteria 9 and 10.
  std::vector<BenchRecord> small_records;
  std::string bench_error;
  try {
    const BenchConfig cfg = BenchConfig::small_preset();
    std::vector<Mechanism> mechs(all_mechanisms().begin(), all_mechanisms().end());
    small_records =
        with_ratios_vs_baseline(run_bench(cfg, mechs, AttentionPattern::NoncausalSelf));
  } catch (const std::exception& e) {
    bench_error = e.what();
  }

  struct Criterion {
    int id;
    const char* name;
    CheckFn fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "composite-index reproduction of published task scores",
       criterion_ci_reproduction},
      {2, "normalization statistics reproduce the published table",
       criterion_stats_reproduction},
      {3, "limit-case equivalence with the dense oracle", criterion_oracle_equivalence},
      {4, "cosformer linear form equals quadratic reweighting", criterion_cosformer_identity},
      {5, "s4d fft path equals the state recurrence", criterion_s4d_dual_path},
      {6, "causal patterns never see the future", criterion_causality},
      {7, "performer error decays with feature count", criterion_performer_convergence},
      {8, "pattern-support matrix is exact", criterion_support_matrix},
      {9, "efficiency-length procedure (analytic, equivariance, end-to-end)",
       [&] {
         if (!bench_error.empty()) return std::optional<Failure>{Failure{bench_error}};
         return criterion_efflen(small_records);
       }},
      {10, "scaling trends on the small preset",
       [&] {
         if (!bench_error.empty()) return std::optional<Failure>{Failure{bench_error}};
         return criterion_scaling_trends(small_records);
       }},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    std::optional<Failure> failure;
    try {
      failure = criterion.fn();
    } catch (const std::exception& e) {
      failure = Failure{std::string("exception: ") + e.what()};
    }
    if (failure) {
      ++failures;
      std::printf("criterion %2d [FAIL] %s -- %s\n", criterion.id, criterion.name,
                  failure->detail.c_str());
    } else {
      std::printf("criterion %2d [PASS] %s\n", criterion.id, criterion.name);
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu acceptance criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
