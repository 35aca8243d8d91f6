#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "support.hpp"

using namespace driftlab;

TEST(Theorem1, ClosedFormValues) {
  EXPECT_NEAR(theorem1_bound({1, 1.0, 0.0, 0.0, 0.0}).lambda_lower, 2 * std::exp(-2.0), 1e-15);
  BoundReport r = theorem1_bound({2, std::sqrt(0.5), 2.0, 0.0, 0.0});
  EXPECT_NEAR(r.D, 2.0, 1e-15);
  EXPECT_NEAR(r.E, 1.0, 1e-15);
  EXPECT_NEAR(r.lambda_lower, 7 * std::exp(-4.0), 1e-15);
}

TEST(Theorem1, NegativeEIsClampedAndFlagged) {
  // n = 1: the xi^2 coefficient 16 - 32 + 5 is negative
  BoundReport r = theorem1_bound({1, 1.0, 0.0, 1.0, 0.0});
  EXPECT_LT(r.E_raw, 0.0);
  EXPECT_EQ(r.E, 0.0);
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.lambda_lower, theorem1_bound({1, 1.0, 0.0, 0.0, 0.0}).lambda_lower);
}

TEST(Theorem1, InputValidation) {
  EXPECT_THROW(theorem1_bound({0, 1.0, 0.0, 0.0, 0.0}), PreconditionError);
  EXPECT_THROW(theorem1_bound({2, 0.0, 0.0, 0.0, 0.0}), PreconditionError);
  EXPECT_THROW(theorem1_bound({2, 1.0, -1.0, 0.0, 0.0}), PreconditionError);
  EXPECT_THROW(theorem1_bound({2, 1.0, NAN, 0.0, 0.0}), NumericalDomainError);
  EXPECT_THROW(theorem1_bound_beta({2, 1.0, 0.0, 0.0, 0.0}, 1.0), PreconditionError);
}

TEST(Theorem1, PrintedClosedFormIsAValueOfTheBetaFamily) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    DriftBoundInputs in{1 + t % 5, 0.5 + U(rng), U(rng), U(rng), U(rng)};
    BoundReport r = theorem1_bound(in), o = theorem1_bound_optimal(in);
    // f at the printed x_star is the printed bound, so it never exceeds the true sup
    EXPECT_NEAR(theorem1_f(r.D, r.DE, r.x_star), r.lambda_lower, 1e-12 * std::abs(r.lambda_lower) + 1e-300);
    EXPECT_GE(o.lambda_lower, r.lambda_lower * (1 - 1e-12));
    // the beta family reaches the optimum at beta = x / (x - 1); for huge x beta rounds to 1
    double beta = o.x_star / (o.x_star - 1);
    if (!(beta > 1 + 1e-9)) continue;
    ++checked;
    EXPECT_NEAR(theorem1_bound_beta(in, beta), o.lambda_lower, 1e-9 * std::abs(o.lambda_lower));
  }
  EXPECT_GT(checked, 25);
}

TEST(Theorem1, SweepFindsExactMaximizer) {
  DriftBoundInputs in{2, std::sqrt(0.5), 2.0, 0.0, 0.0};
  BetaSweep s = beta_sweep(in);
  BoundReport o = theorem1_bound_optimal(in);
  EXPECT_NEAR(s.best_log_x, std::log(o.x_star), 2 * s.resolution);
  EXPECT_NEAR(s.best_value, o.lambda_lower, 1e-8);
  EXPECT_NEAR(std::log(o.x_star), 1 + std::sqrt(3.0), 1e-15);
}

TEST(Theorem1, ScalingLaw) {
  DriftBoundInputs in{3, 2.0, 0.5, 0.4, 0.3};
  double b = theorem1_bound(in).lambda_lower;
  for (double rho : {0.5, 2.0, 10.0}) EXPECT_NEAR(theorem1_bound(in.rescaled(rho)).lambda_lower * rho * rho / b, 1.0, 1e-13);
}

TEST(Quartic, BoundDominatesCompanionRoots) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    double A = U(rng), B = U(rng), C = U(rng);
    auto q = quartic_root_bound(A, B, C);
    EXPECT_GE(q.relaxed, q.a);
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    comp(0, 0) = A, comp(0, 1) = B, comp(0, 3) = C;
    comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    for (int i = 0; i < 4; ++i) {
      auto z = es.eigenvalues()[i];
      if (std::abs(z.imag()) < 1e-9) {
        EXPECT_LE(z.real(), q.a * (1 + 1e-12));
        EXPECT_NEAR(quartic_value(A, B, C, z.real()), 0.0, 1e-8 * (1 + std::pow(z.real(), 4)));
      }
    }
    EXPECT_GT(quartic_value(A, B, C, q.a), 0.0);
  }
  EXPECT_THROW(quartic_root_bound(-1, 0, 0), PreconditionError);
}

TEST(Theorem4, DisplayedFormAndImpliedConstant) {
  Theorem4Inputs in{2, 3.0, 0.0, 0.0, 0.0, 1.0};
  BoundReport r = theorem4_bound(in);
  EXPECT_NEAR(r.lambda_lower, theorem1_shape(0.0) / (4 * 2 * 9.0), 1e-15);
  Theorem4Inputs in2{2, 3.0, 0.1, 0.2, 0.05, 1.0};
  double lam = 0.5 * theorem4_bound(in2).lambda_lower;
  double C = theorem4_implied_C(in2, lam);
  in2.C = C;
  EXPECT_NEAR(theorem4_bound(in2).lambda_lower, lam, 1e-10 * lam);
  EXPECT_GT(C, 1.0);
  EXPECT_EQ(theorem4_implied_C(in2, 1.0), 0.0);
  in2.C = 0.0;
  EXPECT_THROW(theorem4_bound(in2), PreconditionError);
}

TEST(Theorem4, CertifiedBoundIsHalfTheDoubledDriftBound) {
  Manifold M = make_manifold("nk_torus");
  Grid g(M.metric.chart(), 8);
  auto t = theorem4_certified(*M.hermitian, g);
  DriftBoundInputs in{4, t.geometry.d, t.geometry.k, 2 * t.lee.xi_sup, 2 * t.lee.grad_xi_sup};
  EXPECT_NEAR(t.certified.lambda_lower, 0.5 * theorem1_bound(in).lambda_lower, 1e-300);
  EXPECT_GT(t.certified.lambda_lower, 0.0);
  // |xi| = |eta| for the Lee form: sup over x2 of 0.05 cos / (1 + 0.1 sin), in the metric g = 2 diag
  EXPECT_GT(t.lee.xi_sup, 0.0);
  EXPECT_GT(t.star_sup, 0.0);
}

TEST(Gradient, RhsIsNonnegativeOnTheRange) {
  DriftBoundInputs in{2, 3.0, 0.1, 0.2, 0.3};
  for (double beta : {1.5, 2.0, 3.0})
    for (double u = -1.0; u <= 1.0; u += 0.125) EXPECT_GE(gradient_estimate_rhs(in, beta, 0.8, u), 0.0);
}

TEST(Harnack, RatioGrowsWithDiameter) {
  EXPECT_LT(harnack_ratio(1.0, 0.5), harnack_ratio(2.0, 0.5));
  EXPECT_GE(harnack_ratio(1.0, 0.0), 1.0);
}

TEST(ConformalPipeline, FlatBaseRecoversAValidBound) {
  Manifold M = make_manifold("conf_torus", {{"dim", "4"}});
  Grid g(M.metric.chart(), 8);
  ConformalPipelineOptions o;
  o.n_c = 2;
  o.f_invariant = M.drift_invariant;
  auto r = conformally_flat_pipeline(M.metric, M.flattening, g, o);
  EXPECT_LT(r.flatness_residual, 1e-12);
  EXPECT_GE(r.lambda_lower, 0.0);
  EXPECT_TRUE(std::isfinite(r.lambda_lower));
  // the flattening is -f = -0.1 cos x0
  EXPECT_NEAR(r.sampled_f_max, 0.1, 1e-12);
  EXPECT_NEAR(r.sampled_f_min, -0.1, 1e-12);
  EXPECT_GE(r.grad_f_bound, 0.1 - 1e-12);
  // the true eigenvalue lies far above
  auto v = verify_theorem1(M.metric, M.drift, g, VerifyOptions{{}, Fault::none, 8, M.drift_invariant, false});
  EXPECT_GE(v.lambda1, r.lambda_lower);
}

TEST(ConformalPipeline, RejectsNonFlatteningFactor) {
  Manifold M = make_manifold("conf_torus", {{"dim", "4"}});
  auto zero = make_field(4, 1, [](const auto* x, auto* o) { o[0] = 0.0 * x[0]; });
  EXPECT_THROW(conformally_flat_pipeline(M.metric, zero, Grid(M.metric.chart(), 6)), FlatnessError);
  Manifold M2 = make_manifold("conf_torus");
  EXPECT_THROW(conformally_flat_pipeline(M2.metric, M2.flattening, Grid(M2.metric.chart(), 8)), DimensionError);
}
