#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "kdviss/lyapunov.hpp"

namespace kdviss {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

LinearOperator scaled_identity(const Grid& g, double s) {
  return LinearOperator(g, BandedMatrix(g.size(), 0, 0).shifted(s, 0.0));
}

StateVector unit_state(const Grid& g, std::uint64_t seed) {
  auto rng = sample_engine(seed, 0);
  StateVector z = random_smooth(g, rng);
  z *= 1.0 / norm_l2(z);
  return z;
}

TEST(LyapunovFunctions, ClosedFormsOnUnitState) {
  const Grid g(kTwoPi, 31);
  const StateVector z = unit_state(g, 1);
  LyapunovParams p;
  p.m = 3.0;
  p.m_tilde = 2.0;
  p.r = 3.0;
  EXPECT_NEAR(v_quadratic(p, z), 1.0, 1e-12);
  EXPECT_NEAR(v1(p, z), 3.0, 1e-12);
  EXPECT_NEAR(v2(p, z), 7.0, 1e-12);
  p.p = scaled_identity(g, 2.0);
  EXPECT_NEAR(v_quadratic(p, z), 2.0, 1e-12);
  EXPECT_NEAR(p.norm_p(), 2.0, 1e-12);
}

TEST(LyapunovFunctions, UnsetWeightsThrow) {
  const Grid g(kTwoPi, 31);
  const LyapunovParams p;
  EXPECT_THROW(v1(p, StateVector(g)), ParameterError);
  EXPECT_THROW(v2(p, StateVector(g)), ParameterError);
}

TEST(ValidateP, RejectsNonSymmetricAndIndefinite) {
  const Grid g(1.0, 6);
  LyapunovParams p;
  p.p = scaled_identity(g, -1.0);
  EXPECT_THROW(p.validate_p(), ParameterError);
  BandedMatrix m = BandedMatrix(6, 1, 1).shifted(1.0, 0.0);
  m.at(0, 1) = 0.5;
  p.p = LinearOperator(g, m);
  EXPECT_THROW(p.validate_p(), ParameterError);
  p.p = scaled_identity(g, 3.0);
  EXPECT_NO_THROW(p.validate_p());
}

TEST(DecayConstant, NegativeIdentityGenerator) {
  const Grid g(1.0, 10);
  // A~ = -2 I, so A~^T + A~ = -4 I
  EXPECT_NEAR(measure_decay_constant(scaled_identity(g, -1.0)), 4.0, 1e-12);
  EXPECT_NEAR(measure_decay_constant(scaled_identity(g, -1.0), scaled_identity(g, 2.0)), 8.0, 1e-12);
}

TEST(DecayConstant, KdvIsAtLeastTwo) {
  for (std::size_t n : {63u, 127u}) {
    const LinearOperator a = build_kdv_operator(Grid(kTwoPi, n));
    const double c = measure_decay_constant(a);
    EXPECT_GE(c, 2.0);
    EXPECT_NEAR(c, 2.0 - 2.0 * a.max_symmetric_eigenvalue(), 1e-9);
  }
}

TEST(Case1, ArithmeticForHilbertConstants) {
  const Case1Params c = select_params_case1(2.0, 1.0, 1.0, 3.0, 3.0, 0.5);
  EXPECT_DOUBLE_EQ(c.m, 2.0);
  EXPECT_DOUBLE_EQ(c.eps2, 24.0);
  EXPECT_DOUBLE_EQ(c.eps1, 2.0);
  EXPECT_DOUBLE_EQ(c.alpha, 1.0);
  EXPECT_NEAR(c.alpha_without_c0, 4.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.rho_gain, 306.0);

  LyapunovParams p;
  p.c = 2.0;
  p.c0 = 3.0;
  p.k = 3.0;
  p.m = c.m;
  p.eps1 = c.eps1;
  p.eps2 = c.eps2;
  EXPECT_TRUE(p.case1_feasible());
  p.m = 1.9;
  EXPECT_FALSE(p.case1_feasible());
}

TEST(Case1, Rejections) {
  EXPECT_THROW(select_params_case1(0.0, 1, 1, 1, 1), InfeasibleParameters);
  EXPECT_THROW(select_params_case1(-1.0, 1, 1, 1, 1), InfeasibleParameters);
  EXPECT_THROW(select_params_case1(1.0, 1, 1, 1, 1, 1.0), ParameterError);
  EXPECT_THROW(select_params_case1(1.0, 1, 1, 0.0, 1), ParameterError);
}

TEST(Case2, ArithmeticAndStrictMargin) {
  const Case2Params c = select_param_case2(0.5, 1.0, 1.5, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(c.m_tilde, 1.5);
  ASSERT_TRUE(c.mu.has_value());
  EXPECT_DOUBLE_EQ(*c.mu, 0.5);
  EXPECT_FALSE(select_param_case2(0.5, 1.0, 1.5).mu.has_value());
  EXPECT_THROW(select_param_case2(0.5, 1.0, 1.0), ParameterError);
  LyapunovParams p;
  p.c_s = 0.5;
  p.m_tilde = 1.0;
  EXPECT_FALSE(p.case2_feasible());
  p.m_tilde = c.m_tilde;
  EXPECT_TRUE(p.case2_feasible());
}

TEST(EmbeddingConstant, DominatesEverySample) {
  const LinearOperator a = build_kdv_operator(Grid(kTwoPi, 127));
  const double cs = estimate_embedding_constant(a, 300, 4);
  EXPECT_GT(cs, 0.0);
  for (std::uint64_t i = 0; i < 300; ++i) {
    auto rng = sample_engine(4, i);
    const StateVector z = random_smooth(a.grid(), rng);
    EXPECT_LE(norm_linf(z), cs * norm_graph(z, a) * (1 + 1e-12));
  }
  EXPECT_GE(estimate_embedding_constant(a, 600, 4), cs);
  EXPECT_THROW(estimate_embedding_constant(a, 0, 4), ParameterError);
}

TEST(EmbeddingConstant, StableUnderGridRefinement) {
  const double coarse = estimate_embedding_constant(Grid(kTwoPi, 127), 500, 9);
  const double fine = estimate_embedding_constant(Grid(kTwoPi, 255), 500, 9);
  EXPECT_TRUE(std::isfinite(coarse));
  EXPECT_NEAR(fine, coarse, 0.05 * coarse);
}

TEST(DissipationReport, LinearLoopQuadraticV) {
  const LinearOperator a = build_kdv_operator(Grid(kTwoPi, 127));
  const SaturatedSystem sys(a, std::nullopt, DisturbanceSignal::zero());
  auto rng = sample_engine(7, 0);
  const Trajectory tr = simulate(sys, random_smooth(a.grid(), rng), 2.0, 1e-3, ObserverSettings::norms_only());
  const double c = measure_decay_constant(a);
  EXPECT_EQ(dissipation_report(tr, LyapunovChoice::V, 0.95 * c, 0.0).violation_count, 0);
  EXPECT_GT(dissipation_report(tr, LyapunovChoice::V, 2.0 * c, 0.0).violation_count, 0);
}

TEST(DissipationReport, Case1WithDisturbance) {
  const LinearOperator a = build_kdv_operator(Grid(kTwoPi, 127));
  const auto sigma = SaturationMap::hilbert(1.0);
  const SaturatedSystem sys(a, sigma, DisturbanceSignal::cosine(0.05));
  const double c = measure_decay_constant(a);
  const Case1Params p = select_params_case1(c, 1.0, 1.0, sigma.item5_c0(), sigma.lipschitz_k());
  ObserverSettings obs;
  obs.m = p.m;
  obs.store_states = false;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto rng = sample_engine(seed, 5);
    StateVector z0 = random_smooth(a.grid(), rng);
    z0 *= 3.0 / norm_l2(z0);
    const Trajectory tr = simulate(sys, z0, 3.0, 1e-3, obs);
    const DissipationReport rep = dissipation_report(tr, LyapunovChoice::V1, p.alpha, p.rho_gain);
    EXPECT_EQ(rep.violation_count, 0);
  }
}

TEST(DissipationReport, CsvAndShortTrajectory) {
  Trajectory tr;
  tr.times = {0.0, 0.1};
  tr.observables.resize(2);
  EXPECT_THROW(dissipation_report(tr, LyapunovChoice::V, 1.0, 0.0), ParameterError);
  tr.times.push_back(0.2);
  tr.observables.resize(3);
  std::ostringstream os;
  write_dissipation_csv(os, dissipation_report(tr, LyapunovChoice::V, 1.0, 0.0));
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,V,dVdt,bound,margin");
}

}  // namespace
}  // namespace kdviss
