#include <gtest/gtest.h>

#include <cmath>

#include "attnkit/oracles.hpp"
#include "attnkit/probe.hpp"
#include "attnkit/registry.hpp"

using namespace attnkit;

namespace {

AttentionInputs random_inputs(Rng& rng, std::size_t n, std::size_t m, std::size_t d,
                              std::size_t heads, AttentionPattern pattern) {
  return AttentionInputs::make(gaussian_matrix(rng, n, d), gaussian_matrix(rng, m, d),
                               gaussian_matrix(rng, m, d), pattern, heads);
}

AttentionInputs with_pattern(const AttentionInputs& in, AttentionPattern pattern) {
  AttentionInputs copy;
  copy.q = in.q;
  copy.k = in.k;
  copy.v = in.v;
  copy.pattern = pattern;
  copy.heads = in.heads;
  return copy;
}

AttentionInputs constant_value_inputs(Rng& rng, std::size_t n, std::size_t m, std::size_t d,
                                      std::size_t heads, AttentionPattern pattern,
                                      std::vector<double>* c_out = nullptr) {
  std::vector<double> c(d);
  for (auto& x : c) x = rng.next_gaussian();
  Matrix v(m, d);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) v(i, j) = c[j];
  }
  if (c_out) *c_out = c;
  return AttentionInputs::make(gaussian_matrix(rng, n, d), gaussian_matrix(rng, m, d),
                               std::move(v), pattern, heads);
}

double max_row_diff(const Matrix& a, const Matrix& b, std::size_t row) {
  double mx = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    mx = std::max(mx, std::abs(a(row, j) - b(row, j)));
  }
  return mx;
}

}  // namespace

// ---------------- local ----------------

TEST(Local, FullWindowEqualsVanilla) {
  Rng rng(1);
  MechanismConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const auto in = random_inputs(rng, 12, 12, 8, 2, AttentionPattern::NoncausalSelf);
    cfg.window = 24;  // >= 2n
    EXPECT_LT(max_abs_diff(local_attention(in, cfg), oracles::dense_attention_reference(in)),
              1e-12);
  }
}

TEST(Local, SingleTokenReturnsItsValue) {
  Rng rng(2);
  MechanismConfig cfg;
  const auto in = random_inputs(rng, 1, 1, 4, 1, AttentionPattern::NoncausalSelf);
  EXPECT_LT(max_abs_diff(local_attention(in, cfg), in.v), 1e-15);
}

TEST(Local, CausalHalfWindowZeroIsIdentityOverValues) {
  Rng rng(3);
  MechanismConfig cfg;
  cfg.window = 1;  // floor(w/2) == 0
  const auto in = random_inputs(rng, 9, 9, 4, 2, AttentionPattern::CausalSelf);
  EXPECT_LT(max_abs_diff(local_attention(in, cfg), in.v), 1e-12);
}

TEST(Local, FinalPositionAgreesAcrossCausality) {
  Rng rng(4);
  MechanismConfig cfg;
  cfg.window = 6;
  const auto ns = random_inputs(rng, 20, 20, 8, 2, AttentionPattern::NoncausalSelf);
  const auto cs = with_pattern(ns, AttentionPattern::CausalSelf);
  const Matrix a = local_attention(ns, cfg);
  const Matrix b = local_attention(cs, cfg);
  EXPECT_LT(max_row_diff(a, b, 19), 1e-12);
}

// ---------------- nystrom ----------------

TEST(Nystrom, LandmarkPerTokenMatchesVanilla) {
  Rng rng(5);
  MechanismConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    const auto in = random_inputs(rng, 16, 16, 8, 2, AttentionPattern::NoncausalSelf);
    cfg.landmarks = 16;
    EXPECT_LT(
        max_abs_diff(nystrom_attention(in, cfg), oracles::dense_attention_reference(in)),
        1e-3);
  }
}

TEST(Nystrom, SingleTokenSingleLandmark) {
  Rng rng(6);
  MechanismConfig cfg;
  cfg.landmarks = 1;
  const auto in = random_inputs(rng, 1, 1, 4, 1, AttentionPattern::NoncausalSelf);
  EXPECT_LT(max_abs_diff(nystrom_attention(in, cfg), in.v), 1e-8);
}

TEST(Nystrom, SegmentMeansAverageContiguousPairs) {
  Matrix x(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = 10.0 * static_cast<double>(i);
  }
  const Matrix means = detail::segment_means(x, 2);
  EXPECT_DOUBLE_EQ(means(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(means(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(means(1, 0), 2.5);
  EXPECT_DOUBLE_EQ(means(1, 1), 25.0);
}

TEST(Nystrom, RejectsMoreLandmarksThanTokens) {
  Rng rng(7);
  MechanismConfig cfg;
  cfg.landmarks = 9;
  const auto in = random_inputs(rng, 8, 8, 4, 1, AttentionPattern::NoncausalSelf);
  EXPECT_THROW(nystrom_attention(in, cfg), ConfigError);
}

// ---------------- performer ----------------

TEST(Performer, ZeroProjectionGivesUniformWeightsOverEqualNormKeys) {
  Rng rng(8);
  const std::size_t n = 6, d = 4;
  Matrix q = gaussian_matrix(rng, n, d);
  Matrix k = gaussian_matrix(rng, n, d);
  for (std::size_t i = 0; i < n; ++i) {  // normalize keys to unit norm
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) norm += k(i, j) * k(i, j);
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < d; ++j) k(i, j) /= norm;
  }
  Matrix v = gaussian_matrix(rng, n, d);

  Matrix w(3, d);  // W = 0 forced
  Matrix out(n, d);
  detail::random_feature_attention_head(q, k, v, w, {}, 1.0, 1e-6, out.view());
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += v(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(out(i, j), mean, 1e-12);
  }
}

TEST(Performer, ZeroKeysAverageValuesThroughPublicOp) {
  Rng rng(9);
  MechanismConfig cfg;
  AttentionInputs in = random_inputs(rng, 8, 8, 4, 1, AttentionPattern::NoncausalSelf);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 4; ++j) in.k(i, j) = 0.0;
  }
  Rng mech_rng(77);
  const Matrix out = performer_attention(in, cfg, mech_rng);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 8; ++i) mean += in.v(i, j);
    mean /= 8.0;
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(out(i, j), mean, 1e-12);
  }
}

TEST(Performer, ConstantValuesExact) {
  Rng rng(10);
  MechanismConfig cfg;
  std::vector<double> c;
  const auto in =
      constant_value_inputs(rng, 12, 12, 8, 2, AttentionPattern::NoncausalSelf, &c);
  Rng mech_rng(78);
  const Matrix out = performer_attention(in, cfg, mech_rng);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(out(i, j), c[j], 1e-12);
  }
}

TEST(Performer, CrossPatternsAreElementwiseIdentical) {
  Rng rng(11);
  MechanismConfig cfg;
  const auto nc = random_inputs(rng, 7, 11, 8, 2, AttentionPattern::NoncausalCross);
  const auto cc = with_pattern(nc, AttentionPattern::CausalCross);
  EXPECT_EQ(max_abs_diff(apply_mechanism(Mechanism::Performer, nc, cfg),
                         apply_mechanism(Mechanism::Performer, cc, cfg)),
            0.0);
}

TEST(Performer, ErrorShrinksWithFeatureCount) {
  Rng rng(12);
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
  auto med_err = [&](std::size_t feats) {
    MechanismConfig cfg;
    cfg.feature_dim = feats;
    cfg.seed = 5;
    const Matrix approx = apply_mechanism(Mechanism::Performer, in, cfg);
    std::vector<double> errs;
    for (std::size_t i = 0; i < exact.rows(); ++i) {
      for (std::size_t j = 0; j < exact.cols(); ++j) {
        errs.push_back(std::abs(approx(i, j) - exact(i, j)) /
                       std::max(std::abs(exact(i, j)), 1e-12));
      }
    }
    std::sort(errs.begin(), errs.end());
    return errs[errs.size() / 2];
  };
  const double coarse = med_err(32);
  const double fine = med_err(2048);
  EXPECT_LT(fine, coarse);
  EXPECT_LT(fine, 0.1);
}

// ---------------- lara ----------------

TEST(Lara, SingleStandardProposalReducesToPerformerBitExactly) {
  Rng rng(13);
  MechanismConfig cfg;
  cfg.landmarks = 1;
  cfg.lara_standard_proposals = true;
  cfg.feature_dim = 24;
  const auto in = random_inputs(rng, 20, 20, 8, 2, AttentionPattern::NoncausalSelf);
  Rng r1(123), r2(123);
  const Matrix a = lara_attention(in, cfg, r1);
  const Matrix b = performer_attention(in, cfg, r2);
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
}

TEST(Lara, ConstantValuesPreserved) {
  Rng rng(14);
  MechanismConfig cfg;
  std::vector<double> c;
  const auto in =
      constant_value_inputs(rng, 32, 32, 8, 2, AttentionPattern::NoncausalSelf, &c);
  Rng mech_rng(79);
  const Matrix out = lara_attention(in, cfg, mech_rng);
  for (std::size_t i = 0; i < 32; ++i) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(out(i, j), c[j], 1e-10);
  }
}

TEST(Lara, FiniteOutputOfExpectedShape) {
  Rng rng(15);
  MechanismConfig cfg;
  const auto in = random_inputs(rng, 32, 32, 8, 2, AttentionPattern::NoncausalSelf);
  Rng mech_rng(80);
  const Matrix out = lara_attention(in, cfg, mech_rng);
  EXPECT_EQ(out.rows(), 32u);
  EXPECT_EQ(out.cols(), 8u);
  EXPECT_TRUE(out.all_finite());
}

// ---------------- cosformer ----------------

TEST(Cosformer, SingleStrictlyPositiveTokenReturnsItsValue) {
  Rng rng(16);
  MechanismConfig cfg;
  AttentionInputs in = random_inputs(rng, 1, 1, 6, 1, AttentionPattern::NoncausalSelf);
  for (std::size_t j = 0; j < 6; ++j) {
    in.q(0, j) = std::abs(in.q(0, j)) + 0.5;
    in.k(0, j) = std::abs(in.k(0, j)) + 0.5;
  }
  EXPECT_LT(max_abs_diff(cosformer_attention(in, cfg), in.v), 1e-12);
}

TEST(Cosformer, LinearFormMatchesQuadraticReweighting) {
  Rng rng(17);
  MechanismConfig cfg;
  const auto in = random_inputs(rng, 12, 12, 8, 2, AttentionPattern::NoncausalSelf);
  EXPECT_LT(max_abs_diff(cosformer_attention(in, cfg),
                         oracles::cosformer_quadratic_reference(in, cfg.epsilon)),
            1e-10);
}

TEST(Cosformer, CrossLengthsHandled) {
  Rng rng(18);
  MechanismConfig cfg;
  const auto in = random_inputs(rng, 9, 17, 8, 2, AttentionPattern::NoncausalCross);
  EXPECT_LT(max_abs_diff(cosformer_attention(in, cfg),
                         oracles::cosformer_quadratic_reference(in, cfg.epsilon)),
            1e-10);
}

TEST(Cosformer, ConstantValuesPreservedGivenPositiveFeatures) {
  Rng rng(19);
  MechanismConfig cfg;
  std::vector<double> c;
  AttentionInputs in =
      constant_value_inputs(rng, 14, 14, 4, 1, AttentionPattern::NoncausalSelf, &c);
  for (std::size_t i = 0; i < 14; ++i) {  // guarantee a positive feature per row
    in.q(i, 0) = std::abs(in.q(i, 0)) + 0.2;
    in.k(i, 0) = std::abs(in.k(i, 0)) + 0.2;
  }
  const Matrix out = cosformer_attention(in, cfg);
  for (std::size_t i = 0; i < 14; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out(i, j), c[j], 1e-10);
  }
}

TEST(Cosformer, AllZeroFeaturesHitTheFloorAndYieldZeroRows) {
  MechanismConfig cfg;
  Matrix q(3, 4), k(3, 4), v(3, 4);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      q(i, j) = -1.0;  // ReLU kills every feature
      k(i, j) = -2.0;
      v(i, j) = 5.0;
    }
  }
  const auto in = AttentionInputs::make(std::move(q), std::move(k), std::move(v),
                                        AttentionPattern::NoncausalSelf, 1);
  const Matrix out = cosformer_attention(in, cfg);
  EXPECT_EQ(frobenius_norm(out), 0.0);
}

// ---------------- longshort ----------------

TEST(Longshort, ShortBranchOnlyEqualsWindowedSoftmax) {
  Rng rng(20);
  MechanismConfig cfg;
  cfg.window = 8;
  cfg.landmarks = 0;
  for (AttentionPattern p : {AttentionPattern::NoncausalSelf, AttentionPattern::CausalSelf}) {
    const auto in = random_inputs(rng, 40, 40, 8, 2, p);
    EXPECT_LT(max_abs_diff(longshort_attention(in, cfg),
                           oracles::longshort_window_reference(in, 8)),
              1e-12)
        << pattern_code(p);
  }
}

TEST(Longshort, ConstantValuesPreserved) {
  Rng rng(21);
  MechanismConfig cfg;
  cfg.window = 8;
  std::vector<double> c;
  const auto in =
      constant_value_inputs(rng, 32, 32, 8, 2, AttentionPattern::NoncausalSelf, &c);
  const Matrix out = longshort_attention(in, cfg);
  for (std::size_t i = 0; i < 32; ++i) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(out(i, j), c[j], 1e-10);
  }
}

TEST(Longshort, CausalProbeSeesNothing) {
  Rng rng(22);
  MechanismConfig cfg;
  cfg.window = 8;
  const auto in = random_inputs(rng, 32, 32, 8, 2, AttentionPattern::CausalSelf);
  Rng probe_rng(103);
  EXPECT_LE(causality_probe(Mechanism::Longshort, cfg, in, 13, probe_rng), 1e-10);
}

TEST(Longshort, FinalPositionAgreesAcrossCausality) {
  Rng rng(23);
  MechanismConfig cfg;
  cfg.window = 8;
  const auto ns = random_inputs(rng, 32, 32, 8, 2, AttentionPattern::NoncausalSelf);
  const auto cs = with_pattern(ns, AttentionPattern::CausalSelf);
  const Matrix a = longshort_attention(ns, cfg);
  const Matrix b = longshort_attention(cs, cfg);
  EXPECT_LT(max_row_diff(a, b, 31), 1e-10);
}

// ---------------- probsparse ----------------

TEST(Probsparse, IdenticalKeysZeroSparsityMeasure) {
  Rng rng(24);
  Matrix q = gaussian_matrix(rng, 6, 4);
  Matrix k(8, 4);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 4; ++j) k(i, j) = 0.3 * static_cast<double>(j) - 0.1;
  }
  const auto sparsity = detail::probsparse_sparsity(q, k, {0, 3, 5});
  for (double s : sparsity) EXPECT_NEAR(s, 0.0, 1e-12);
}

TEST(Probsparse, SelectingAllQueriesEqualsVanilla) {
  Rng rng(25);
  MechanismConfig cfg;
  cfg.factor = 32;  // u = factor ceil(ln n) >= n
  for (int trial = 0; trial < 5; ++trial) {
    const auto in = random_inputs(rng, 16, 16, 8, 2, AttentionPattern::NoncausalSelf);
    Rng mech_rng(200 + trial);
    EXPECT_LT(max_abs_diff(probsparse_attention(in, cfg, mech_rng),
                           oracles::dense_attention_reference(in)),
              1e-12);
  }
}

TEST(Probsparse, ForcedZeroSelectionReturnsValueMean) {
  Rng rng(26);
  MechanismConfig cfg;
  const auto in = random_inputs(rng, 10, 10, 4, 1, AttentionPattern::NoncausalSelf);
  Rng mech_rng(201);
  const Matrix out = probsparse_attention(in, cfg, mech_rng, 0);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 10; ++i) mean += in.v(i, j);
    mean /= 10.0;
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(out(i, j), mean, 1e-14);
  }
}

// ---------------- abc ----------------

TEST(Abc, SlotAttentionRowsSumToOne) {
  Rng rng(27);
  Matrix wk = gaussian_matrix(rng, 5, 8);
  Matrix k = gaussian_matrix(rng, 12, 8);
  const Matrix slots = softmax_rows(matmul_nt(wk, k));
  for (std::size_t s = 0; s < 5; ++s) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 12; ++j) sum += slots(s, j);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Abc, OutputShapeAndFiniteness) {
  Rng rng(28);
  MechanismConfig cfg;
  cfg.landmarks = 6;
  const auto in = random_inputs(rng, 9, 13, 8, 2, AttentionPattern::NoncausalCross);
  const Matrix out = abc_attention(in, cfg);
  EXPECT_EQ(out.rows(), 9u);
  EXPECT_EQ(out.cols(), 8u);
  EXPECT_TRUE(out.all_finite());
}

TEST(Abc, ConstantValuesPreservedOnEveryPattern) {
  Rng rng(29);
  MechanismConfig cfg;
  cfg.landmarks = 6;
  for (AttentionPattern p : all_patterns()) {
    std::vector<double> c;
    const auto in = constant_value_inputs(rng, 15, 15, 8, 2, p, &c);
    const Matrix out = abc_attention(in, cfg);
    for (std::size_t i = 0; i < out.rows(); ++i) {
      for (std::size_t j = 0; j < out.cols(); ++j) {
        EXPECT_NEAR(out(i, j), c[j], 1e-10) << pattern_code(p);
      }
    }
  }
}

TEST(Abc, CausalFinalPositionEqualsNoncausal) {
  Rng rng(30);
  MechanismConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    const auto ns = random_inputs(rng, 24, 24, 8, 2, AttentionPattern::NoncausalSelf);
    const auto cs = with_pattern(ns, AttentionPattern::CausalSelf);
    const Matrix a = abc_attention(ns, cfg);
    const Matrix b = abc_attention(cs, cfg);
    EXPECT_LT(max_row_diff(a, b, 23), 1e-10);
  }
}

TEST(Abc, CrossPatternsAreElementwiseIdentical) {
  Rng rng(31);
  MechanismConfig cfg;
  const auto nc = random_inputs(rng, 7, 11, 8, 2, AttentionPattern::NoncausalCross);
  const auto cc = with_pattern(nc, AttentionPattern::CausalCross);
  EXPECT_EQ(max_abs_diff(abc_attention(nc, cfg), abc_attention(cc, cfg)), 0.0);
}

// ---------------- s4d ----------------

TEST(S4d, ImpulseResponseIsTheKernel) {
  Rng rng(32);
  S4DParams params = S4DParams::init(3, 8, rng);
  for (auto& d : params.d) d = 0.0;
  Matrix impulse(40, 3);
  for (std::size_t ch = 0; ch < 3; ++ch) impulse(0, ch) = 1.0;
  for (AttentionPattern p : {AttentionPattern::CausalSelf, AttentionPattern::NoncausalSelf}) {
    const Matrix y = s4d_layer(impulse, params, p);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const auto kernel = detail::s4d_kernel(params, ch, 40);
      for (std::size_t t = 0; t < 40; ++t) {
        EXPECT_NEAR(y(t, ch), kernel[t], 1e-10) << pattern_code(p);
      }
    }
  }
}

TEST(S4d, FftPathMatchesStateRecurrence) {
  Rng rng(33);
  Rng prng(34);
  const S4DParams params = S4DParams::init(4, 16, prng);
  Matrix u = gaussian_matrix(rng, 64, 4);
  for (AttentionPattern p : {AttentionPattern::NoncausalSelf, AttentionPattern::CausalSelf}) {
    EXPECT_LT(max_abs_diff(s4d_layer(u, params, p),
                           oracles::s4d_recurrence_reference(u, params, p)),
              1e-8)
        << pattern_code(p);
  }
}

TEST(S4d, CausalProbeSeesNothing) {
  Rng rng(35);
  MechanismConfig cfg;
  const auto in = random_inputs(rng, 32, 32, 8, 2, AttentionPattern::CausalSelf);
  Rng probe_rng(104);
  EXPECT_LE(causality_probe(Mechanism::S4d, cfg, in, 11, probe_rng), 1e-10);
}

TEST(S4d, FinalPositionAgreesAcrossCausality) {
  Rng rng(36);
  MechanismConfig cfg;
  const auto ns = random_inputs(rng, 24, 24, 8, 2, AttentionPattern::NoncausalSelf);
  const auto cs = with_pattern(ns, AttentionPattern::CausalSelf);
  const Matrix a = apply_mechanism(Mechanism::S4d, ns, cfg);
  const Matrix b = apply_mechanism(Mechanism::S4d, cs, cfg);
  EXPECT_LT(max_row_diff(a, b, 23), 1e-10);
}

TEST(S4d, RejectsUnstableState) {
  Rng rng(37);
  S4DParams params = S4DParams::init(2, 4, rng);
  params.a[3] = {0.1, 1.0};  // Re >= 0
  Matrix u(8, 2);
  EXPECT_THROW(s4d_layer(u, params, AttentionPattern::CausalSelf), NumericError);
}

// ---------------- cross-mechanism properties ----------------

TEST(AllMechanisms, ConstantValuePreservation) {
  struct Case {
    Mechanism mech;
    double tol;
  };
  const Case cases[] = {
      {Mechanism::Vanilla, 1e-12}, {Mechanism::Local, 1e-12},
      {Mechanism::Cosformer, 1e-10}, {Mechanism::Performer, 1e-10},
      {Mechanism::Lara, 1e-10},      {Mechanism::Longshort, 1e-10},
      {Mechanism::Probsparse, 1e-12}, {Mechanism::Abc, 1e-10},
      {Mechanism::Nystrom, 1e-3},
  };
  Rng rng(38);
  MechanismConfig cfg;
  for (const Case& c : cases) {
    std::vector<double> cval;
    AttentionInputs in =
        constant_value_inputs(rng, 24, 24, 8, 2, AttentionPattern::NoncausalSelf, &cval);
    if (c.mech == Mechanism::Cosformer) {
      for (std::size_t i = 0; i < 24; ++i) {
        in.q(i, 0) = std::abs(in.q(i, 0)) + 0.2;
        in.q(i, 4) = std::abs(in.q(i, 4)) + 0.2;
        in.k(i, 0) = std::abs(in.k(i, 0)) + 0.2;
        in.k(i, 4) = std::abs(in.k(i, 4)) + 0.2;
      }
    }
    const Matrix out = apply_mechanism(c.mech, in, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      for (std::size_t j = 0; j < out.cols(); ++j) {
        worst = std::max(worst, std::abs(out(i, j) - cval[j]));
      }
    }
    EXPECT_LT(worst, c.tol) << mechanism_name(c.mech);
  }
}
