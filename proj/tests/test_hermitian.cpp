#include <gtest/gtest.h>

#include "support.hpp"

using namespace driftlab;
using testsupport::generic_hermitian2;
using testsupport::generic_hermitian3;
using testsupport::random_points;

TEST(Hermitian, InducedMetricConvention) {
  Manifold M = make_manifold("kahler_torus", {{"scale", "1"}});
  Eigen::MatrixXd g = M.metric.g({0.1, 0.2, 0.3, 0.4});
  EXPECT_NEAR((g - 2.0 * Eigen::MatrixXd::Identity(4, 4)).norm(), 0.0, 1e-15);
  HermitianStructure hs = generic_hermitian2();
  std::vector<double> p{0.3, 1.0, 2.0, 4.0};
  Eigen::MatrixXcd H = hs.h(p);
  Eigen::MatrixXd G = hs.induced_metric().g(p);
  // g(d_x1, d_y2) = 2 Re(i h_12 conj) convention check via a symmetric positive definite result
  EXPECT_NEAR((G - G.transpose()).norm(), 0.0, 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().minCoeff(), 0.0);
  EXPECT_NEAR(G(0, 0), 2 * H(0, 0).real(), 1e-15);
  EXPECT_NEAR(G(0, 2), 2 * H(0, 1).real(), 1e-15);
}

TEST(Hermitian, UnitaryFrameIsOrthonormal) {
  HermitianStructure hs = generic_hermitian3();
  for (const auto& p : random_points(6, 5, 2)) {
    auto H = hs.h(p);
    EXPECT_LT(frame_orthonormality_defect(H, unitary_frame(H)), 1e-13);
  }
}

TEST(Hermitian, NkTorusTorsionClosedForm) {
  const double eps = 0.1;
  Manifold M = make_manifold("nk_torus");
  for (const auto& p : random_points(4, 10, 1)) {
    auto t = torsion_one_form(*M.hermitian, p);
    // h_11 = 1 + eps sin x2 with x2 = Re z_2: eta_2 = d_{z_2} log h_11
    double want = 0.5 * eps * std::cos(p[2]) / (1 + eps * std::sin(p[2]));
    EXPECT_NEAR(std::abs(t.eta_coord[1] - cplx(want)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(t.eta_coord[0]), 0.0, 1e-15);
    // unitary frame norm: |eta|^2 = h^{2 2bar} |eta_2|^2 with h_22 = 1
    EXPECT_NEAR(t.eta_norm2, want * want, 1e-15);
  }
}

TEST(Hermitian, KahlerTorusHasNoTorsion) {
  Manifold M = make_manifold("kahler_torus");
  HermitianPoint hp = analyze(*M.hermitian, {0.5, 0.1, 2.0, 3.0});
  FrameQuantities q = frame_quantities(hp);
  EXPECT_EQ(q.T2, 0.0);
  EXPECT_EQ(q.eta2, 0.0);
  auto t = torsion_curvature_identity(q);
  EXPECT_EQ(t.rhs, 0.0);
  EXPECT_EQ(t.residual, 0.0);
}

TEST(Hermitian, HopfLeeFormHasUnitNorm) {
  Manifold M = make_manifold("hopf");
  for (const auto& p : M.sample_points) EXPECT_NEAR(torsion_one_form(*M.hermitian, p).eta_norm2, 1.0, 1e-12);
  EXPECT_THROW(require_global(M), PreconditionError);
}

TEST(Hermitian, ConformalLeeForm) {
  // h = e^{2f} I / 2 in complex dim 2: xi = -(n_c - 1) df = -df
  Manifold M = make_manifold("conf_torus", {{"dim", "4"}});
  for (const auto& p : random_points(4, 5, 3)) {
    auto xi = lee_form(*M.hermitian, p);
    EXPECT_NEAR(xi[0], 0.1 * std::sin(p[0]), 1e-14);
    for (int a = 1; a < 4; ++a) EXPECT_NEAR(xi[a], 0.0, 1e-15);
  }
}

TEST(Hermitian, TorsionCurvatureIdentityWithBianchiSign) {
  for (const auto& hs : {generic_hermitian2(), generic_hermitian3()}) {
    double literal = 0.0;
    for (const auto& p : random_points(hs.real_dim(), 5, 4)) {
      auto t = torsion_curvature_identity(hs, p);
      EXPECT_LT(t.residual, 1e-12 * std::max(1.0, t.rhs));
      EXPECT_LT(t.residual_pre, 1e-12 * std::max(1.0, t.rhs));
      EXPECT_LT(t.imag_max, 1e-12);
      literal = std::max(literal, t.residual_literal);
    }
    // the opposite sign on the R_{ij ibar jbar} term does not balance somewhere
    EXPECT_GT(literal, 1e-4);
  }
}

TEST(Hermitian, ComplexifiedBianchiIdentity) {
  HermitianStructure hs = generic_hermitian3();
  for (const auto& p : random_points(6, 5, 8)) EXPECT_LT(complexified_bianchi_defect(frame_quantities(analyze(hs, p))), 1e-12);
}

TEST(Hermitian, Lemma7ConvergesSecondOrder) {
  HermitianStructure hs = generic_hermitian2();
  std::vector<double> p{0.7, 1.9, 2.5, 5.1}, h{4e-2, 2e-2, 1e-2};
  std::vector<double> e1, e2, e3, e4, e3p;
  for (double s : h) {
    auto r = lemma7_residuals(hs, p, s);
    e1.push_back(r.id1);
    e2.push_back(r.id2);
    e3.push_back(r.id3);
    e4.push_back(r.id4);
    e3p.push_back(r.id3_printed);
  }
  for (const auto* e : {&e1, &e2, &e3, &e4}) EXPECT_GT(observed_order(h, *e), 1.8);
  // printed leading factor 2 leaves an O(1) residual
  EXPECT_LT(std::abs(observed_order(h, e3p)), 0.1);
  EXPECT_GT(e3p.back(), 1e-3);
}

TEST(Hermitian, Theorem2ConstantFreeInequalities) {
  HermitianStructure hs = generic_hermitian2();
  for (const auto& p : random_points(4, 20, 12)) {
    auto r = theorem2_checks(hs, p);
    EXPECT_FALSE(r.violated);
    EXPECT_GE(r.slack_tau, -1e-8);
    EXPECT_GE(r.slack_eta, -1e-8);
    EXPECT_GE(r.implied_C_stmt_second, 0.0);
  }
}

TEST(Forms, EtaViaOmegaSelectsStructureNormalization) {
  for (const auto& hs : {generic_hermitian2()}) {
    auto c = check_eta_via_omega(hs, Grid(hs.chart(), 8));
    EXPECT_EQ(c.selected, -0.5);
    EXPECT_TRUE(c.determined);
  }
  Manifold M = make_manifold("nk_torus3");
  auto c = check_eta_via_omega(*M.hermitian, Grid(M.metric.chart(), 16));
  EXPECT_EQ(c.selected, -0.5);
  EXPECT_THROW(check_eta_via_omega(*make_manifold("conf_torus").hermitian, Grid(PeriodicChart::uniform(2, 1.0), 4)),
               DimensionError);
}

TEST(Forms, KahlerFormPowers) {
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Identity(3, 3);
  Form w = kahler_form(H);
  Form w3 = power(w, 3);
  Form w4 = power(w, 4);
  double top = 0.0, zero = 0.0;
  for (const auto& c : w3.c) top = std::max(top, std::abs(c));
  for (const auto& c : w4.c) zero = std::max(zero, std::abs(c));
  EXPECT_GT(top, 0.0);
  EXPECT_EQ(zero, 0.0);
}

TEST(Forms, AlphaKCorrectedFormulaConverges) {
  Manifold M = make_manifold("nk_torus3");
  for (int k : {1, 2}) {
    std::vector<double> h, rc, rp;
    for (int N : {8, 16, 32}) {
      auto s = alpha_k_sweep(*M.hermitian, Grid(M.metric.chart(), N), k);
      h.push_back(2 * M_PI / N);
      rc.push_back(s.max_residual_corrected);
      rp.push_back(s.max_residual);
    }
    EXPECT_GT(observed_order(h, rc), 1.8) << "k=" << k;
    EXPECT_LT(rc.back(), 1e-4);
    EXPECT_GT(rp.back(), 1e-4);  // printed |eta|^2 coefficient
  }
}

TEST(Forms, AlphaKCorrectedFormulaOnGenericMetric) {
  HermitianStructure hs = generic_hermitian3();
  std::vector<double> p{0.4, 1.2, 2.9, 3.3, 5.0, 0.8};
  std::vector<double> h{4e-2, 2e-2}, r;
  for (double s : h) r.push_back(alpha_k(hs, p, 1, s).residual_corrected);
  EXPECT_GT(observed_order(h, r), 1.8);
}

TEST(Gauduchon, IntegralIdentityHoldsWithCorrectedCoefficient) {
  Manifold M = make_manifold("nk_torus");
  auto r = gauduchon_l2_estimate(*M.hermitian, Grid(M.metric.chart(), 32));
  EXPECT_LT(r.corrected_residual, 1e-10);
  EXPECT_GT(r.identity_residual, 1.0);
  EXPECT_GT(r.slack, 0.0);
  EXPECT_NEAR(r.volume, std::pow(2 * M_PI, 4) * 4, 1e-6);  // sqrt det g = 4 (1 + eps sin x2), mean 4
  EXPECT_LT(r.theta_consistency, 1e-14);
}

TEST(Gauduchon, KGauduchonCoefficients) {
  for (int n = 3; n <= 6; ++n)
    for (int k = 1; k < n; ++k) {
      auto c = k_gauduchon_coefficients(n, k);
      EXPECT_EQ(c.eta_coef, 2 * k - n);
      EXPECT_EQ(c.torsion_coef, n - k - 1);
      EXPECT_EQ(c.admissible, 2 * k > n);
      if (c.admissible) {
        EXPECT_TRUE(c.eta_positive);
      }
    }
  EXPECT_THROW(k_gauduchon_bound_values(1.0, 4, 2), PreconditionError);
  auto b = k_gauduchon_bound_values(2.0, 3, 2);
  EXPECT_NEAR(*b.eta2_bound, 2.0, 1e-15);
  EXPECT_FALSE(b.T2_bound.has_value());
}
