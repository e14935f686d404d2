#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "kdviss/saturation.hpp"

namespace kdviss {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TEST(SatScalar, Examples) {
  EXPECT_EQ(sat_scalar(0.0, 1.0), 0.0);
  EXPECT_EQ(sat_scalar(0.5, 1.0), 0.5);
  EXPECT_EQ(sat_scalar(2.0, 1.0), 1.0);
  EXPECT_EQ(sat_scalar(-3.0, 1.0), -1.0);
  EXPECT_EQ(sat_scalar(2.0, 0.3), 0.3);
  EXPECT_THROW(sat_scalar(1.0, 0.0), ParameterError);
  EXPECT_THROW(sat_scalar(1.0, -1.0), ParameterError);
}

TEST(SatPointwise, InsideBallIsIdentity) {
  const Grid g(kTwoPi, 63);
  const StateVector z = StateVector::sample(g, [](double x) { return 0.9 * std::sin(3 * x); });
  EXPECT_EQ((sat_pointwise(z, 1.0) - z).values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(SatPointwise, ClipsTwoSineToUnitSup) {
  const Grid g(kTwoPi, 127);
  const StateVector z = StateVector::sample(g, [](double x) { return 2.0 * std::sin(x); });
  const StateVector s = sat_pointwise(z, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = z[i];
    const double clamped = v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
    EXPECT_EQ(s[i], clamped);
  }
  EXPECT_EQ(norm_linf(s), 1.0);
  EXPECT_THROW(sat_pointwise(z, 0.0), ParameterError);
}

TEST(SatPointwise, MonotoneOnRandomPairs) {
  const Grid g(kTwoPi, 127);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto rng = sample_engine(21, i);
    const StateVector a = random_rough(g, 3.0, rng);
    const StateVector b = random_rough(g, 3.0, rng);
    EXPECT_GE(inner_l2(sat_pointwise(a, 1.0) - sat_pointwise(b, 1.0), a - b), 0.0);
  }
}

TEST(SatHilbert, Branches) {
  const Grid g(kTwoPi, 127);
  const StateVector base = StateVector::sample(g, [](double x) { return std::sin(x); });
  const StateVector half = base * (0.5 / norm_l2(base));
  const StateVector two = base * (2.0 / norm_l2(base));
  EXPECT_EQ((sat_hilbert(half, 1.0) - half).values().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((sat_hilbert(two, 1.0) - 0.5 * two).values().cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(norm_l2(sat_hilbert(two, 1.0)), 1.0);
  EXPECT_EQ(norm_l2(sat_hilbert(StateVector(g), 1.0)), 0.0);
  EXPECT_THROW(sat_hilbert(two, -1.0), ParameterError);
}

TEST(SaturationMap, DeclaredConstants) {
  const auto h = SaturationMap::hilbert(2.0);
  EXPECT_EQ(h.lipschitz_k(), 3.0);
  EXPECT_EQ(h.item5_c0(), 6.0);
  const auto p = SaturationMap::pointwise(1.0, kTwoPi);
  EXPECT_EQ(p.lipschitz_k(), 1.0);
  EXPECT_DOUBLE_EQ(p.item5_c0(), std::sqrt(kTwoPi));
  EXPECT_THROW(SaturationMap(SaturationKind::HilbertNorm, 1.0, 0.5, 1.0), ParameterError);
  EXPECT_THROW(SaturationMap(SaturationKind::HilbertNorm, 0.0, 1.0, 1.0), ParameterError);
}

TEST(SaturationMap, IdempotentOnTheBall) {
  const Grid g(kTwoPi, 64);
  for (auto sigma : {SaturationMap::hilbert(1.0), SaturationMap::pointwise(1.0, kTwoPi),
                     SaturationMap::hilbert(0.3), SaturationMap::pointwise(0.3, kTwoPi)}) {
    for (std::uint64_t i = 0; i < 200; ++i) {
      auto rng = sample_engine(8, i);
      const StateVector s = sigma(random_rough(g, 4.0, rng));
      EXPECT_LT((sigma(s) - s).values().cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(CheckAxioms, HilbertLevelOne) {
  const Grid g(kTwoPi, 127);
  const AxiomReport r = check_axioms(SaturationMap::hilbert(1.0), g, 10000, 2.0, 1);
  EXPECT_EQ(r.samples_used, 10000);
  EXPECT_EQ(r.bound_violations, 0);
  EXPECT_EQ(r.monotonicity_violations, 0);
  EXPECT_EQ(r.lipschitz_violations, 0);
  EXPECT_EQ(r.item4_violations, 0);
  EXPECT_EQ(r.item5_violations, 0);
  EXPECT_LE(r.lipschitz_estimate, 3.0);
  EXPECT_LE(r.item4_max_residual, 1e-10);
  EXPECT_LE(r.item5_C0_estimate, 3.0);
}

TEST(CheckAxioms, PointwiseLevelOneIsNonexpansive) {
  const Grid g(kTwoPi, 127);
  const auto sigma = SaturationMap::pointwise(1.0, kTwoPi);
  const AxiomReport r = check_axioms(sigma, g, 10000, 2.0, 2);
  EXPECT_EQ(r.total_violations(), 0);
  EXPECT_LE(r.lipschitz_estimate, 1.0 + 1e-12);
  EXPECT_GT(r.lipschitz_estimate, 0.5);  // samples do straddle the level
  EXPECT_LE(r.item5_C0_estimate, sigma.item5_c0());
}

TEST(CheckAxioms, UnsaturatedRegimeIsIdentity) {
  const Grid g(kTwoPi, 127);
  for (auto sigma : {SaturationMap::hilbert(1.0), SaturationMap::pointwise(1.0, kTwoPi)}) {
    const AxiomReport r = check_axioms(sigma, g, 2000, 0.1, 3);
    EXPECT_EQ(r.total_violations(), 0);
    EXPECT_LE(r.item4_max_residual, 0.0);
    EXPECT_NEAR(r.lipschitz_estimate, 1.0, 1e-12);
  }
}

TEST(CheckAxioms, DeterministicForSeed) {
  const Grid g(kTwoPi, 31);
  const auto sigma = SaturationMap::hilbert(1.0);
  std::ostringstream a, b;
  write_key_values(a, check_axioms(sigma, g, 500, 2.0, 17));
  write_key_values(b, check_axioms(sigma, g, 500, 2.0, 17));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("bound_violations=0\n"), std::string::npos);
}

TEST(CheckAxioms, UnderDeclaredConstantsAreReported) {
  const Grid g(kTwoPi, 31);
  // the clamp is not 1-Lipschitz in a weaker claim, but an absurdly small C0 must fail
  const SaturationMap tight(SaturationKind::PointwiseLinf, 1.0, 1.0, 1e-6);
  const AxiomReport r = check_axioms(tight, g, 500, 2.0, 4);
  EXPECT_GT(r.item5_violations, 0);
}

TEST(CheckAxioms, RejectsBadArguments) {
  const Grid g(kTwoPi, 31);
  EXPECT_THROW(check_axioms(SaturationMap::hilbert(), g, 0, 1.0, 1), ParameterError);
  EXPECT_THROW(check_axioms(SaturationMap::hilbert(), g, 10, 0.0, 1), ParameterError);
}

TEST(EstimateItem5, ZeroPerturbationGivesZero) {
  const Grid g(kTwoPi, 63);
  EXPECT_EQ(estimate_item5_C0(SaturationMap::hilbert(), g, 500, 2.0, 1, 0.0), 0.0);
}

TEST(EstimateItem5, HilbertBelowThree) {
  const Grid g(kTwoPi, 127);
  const double c0 = estimate_item5_C0(SaturationMap::hilbert(1.0), g, 5000, 2.0, 5);
  EXPECT_LE(c0, 3.0);
  EXPECT_GT(c0, 0.0);
}

// Brute-force node-wise oracle: s (clamp(s + d) - clamp(s)) <= level |d|
// at every node, so the integral is <= level ||d||_1 <= level sqrt(L) ||d||_2.
TEST(EstimateItem5, PointwiseBelowSqrtLengthBound) {
  const Grid g(kTwoPi, 127);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    auto rng = sample_engine(6, i);
    const StateVector s = random_rough(g, 2.0, rng);
    const StateVector d = random_rough(g, 2.0, rng);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double lhs = s[j] * (sat_scalar(s[j] + d[j], 1.0) - sat_scalar(s[j], 1.0));
      ASSERT_LE(lhs, std::abs(d[j]) + 1e-15);
    }
  }
  const double c0 = estimate_item5_C0(SaturationMap::pointwise(1.0, kTwoPi), g, 10000, 2.0, 6);
  EXPECT_LE(c0, std::sqrt(kTwoPi) + 1e-10);
}

}  // namespace
}  // namespace kdviss
