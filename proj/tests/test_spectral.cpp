#include <gtest/gtest.h>

#include "support.hpp"

using namespace driftlab;

namespace {

double stencil_lambda(double period, int N) {
  double h = period / N;
  return 2 * (1 - std::cos(2 * M_PI * h / period)) / (h * h);
}

// non-gradient drift on the flat square torus: xi = (0.3 + 0.2 sin x1, 0.25 cos x0)
OneFormField rotational_drift() {
  return OneFormField(make_field(2, 2, [](const auto* x, auto* o) {
    o[0] = 0.3 + 0.2 * ad::sin(x[1]);
    o[1] = 0.25 * ad::cos(x[0]);
  }));
}

// no drift: the divergence-form Laplacian is symmetric in the sqrt det g weight
Manifold curved_circle() {
  json spec = {{"name", "curved"}, {"dim", 1}, {"periods", {"2*pi"}}, {"metric", {{"kind", "expression"}, {"params", {{"g", {"exp(0.4*cos(x0))"}}}}}}};
  return manifold_from_spec(spec);
}

}  // namespace

TEST(Operator, FlatStencilClosedForm) {
  Manifold M = make_manifold("flat_torus", {{"n", "1"}});
  for (int N : {16, 40, 64}) {
    auto s = principal_eigenvalue(discretize_laplacian(M.metric, Grid(M.metric.chart(), N)));
    EXPECT_NEAR(s.lambda.real(), stencil_lambda(2 * M_PI, N), 1e-10);
    EXPECT_EQ(s.multiplicity, 2);  // cos and sin
    EXPECT_TRUE(s.converged);
  }
  EXPECT_NEAR(stencil_lambda(2 * M_PI, 16), 0.98722, 1e-5);
}

TEST(Operator, FlatSquareTorusMultiplicityFour) {
  Manifold M = make_manifold("flat_torus");
  auto s = principal_eigenvalue(discretize_laplacian(M.metric, Grid(M.metric.chart(), 24)));
  EXPECT_NEAR(s.lambda.real(), stencil_lambda(2 * M_PI, 24), 1e-10);
  EXPECT_EQ(s.multiplicity, 4);
}

TEST(Operator, RectangularTorusPicksLongestPeriod) {
  Manifold M = make_manifold("flat_torus", {{"period", "2*pi,4*pi"}});
  auto s = principal_eigenvalue(discretize_laplacian(M.metric, Grid(M.metric.chart(), std::vector<int>{16, 32})));
  EXPECT_NEAR(s.lambda.real(), stencil_lambda(4 * M_PI, 32), 1e-10);
  EXPECT_NEAR(M.facts[0].value, 0.25, 1e-15);
}

TEST(Operator, ConstantsInKernelAndWeightedSymmetry) {
  Manifold M = make_manifold("conf_torus");
  auto op = discretize_laplacian(M.metric, Grid(M.metric.chart(), 16));
  EXPECT_EQ(op.symmetry, SymmetryClass::self_adjoint_weighted);
  EXPECT_LT(op.constant_defect(), 1e-13);
  std::mt19937_64 rng(1);
  auto u = detail::random_vector(op.size(), rng), v = detail::random_vector(op.size(), rng);
  EXPECT_LT(op.weighted_symmetry_defect(u, v), 1e-12);
  // a centered first-order drift is not symmetric even when the drift is exact
  Manifold W = make_manifold("witten_torus_1d");
  auto wop = discretize_drift_laplacian(W.metric, W.drift, Grid(W.metric.chart(), 48));
  EXPECT_EQ(wop.symmetry, SymmetryClass::non_self_adjoint);
  EXPECT_LT(wop.constant_defect(), 1e-13);
  auto nsa = discretize_drift_laplacian(make_manifold("flat_torus").metric, rotational_drift(), Grid(PeriodicChart::uniform(2, 2 * M_PI), 8));
  EXPECT_EQ(nsa.symmetry, SymmetryClass::non_self_adjoint);
  EXPECT_LT(nsa.constant_defect(), 1e-13);
}

TEST(Operator, MaterializedMatchesApply) {
  Manifold M = make_manifold("conf_torus");
  auto op = discretize_drift_laplacian(M.metric, M.drift, Grid(M.metric.chart(), 6));
  Eigen::MatrixXd A = op.materialize();
  std::mt19937_64 rng(4);
  Eigen::VectorXd u = detail::random_vector(op.size(), rng);
  EXPECT_LT((A * u - op.apply(u)).norm(), 1e-12 * u.norm());
  EXPECT_LT((A.diagonal() - op.diagonal()).norm(), 1e-12);
}

TEST(Krylov, LanczosMatchesDenseOracle) {
  Manifold M = curved_circle();
  auto op = discretize_laplacian(M.metric, Grid(M.metric.chart(), 200));
  auto s = principal_eigenvalue(op);
  auto d = dense_principal(dense_oracle(op));
  EXPECT_NEAR(s.lambda.real(), d.real(), 1e-9);
  EXPECT_LE(s.residual, 1e-8);
  EXPECT_NE(s.method.find("Lanczos"), std::string::npos) << s.method;
}

TEST(Krylov, ArnoldiMatchesDenseOracleForNonSelfAdjointDrift) {
  Grid g(PeriodicChart::uniform(2, 2 * M_PI), 24);
  auto op = discretize_drift_laplacian(make_manifold("flat_torus").metric, rotational_drift(), g);
  auto s = principal_eigenvalue(op);
  auto ds = dense_oracle(op);
  auto d = dense_principal(ds);
  // either member of a conjugate pair may come back
  EXPECT_NEAR(s.lambda.real(), d.real(), 1e-8);
  EXPECT_NEAR(std::abs(s.lambda.imag()), std::abs(d.imag()), 1e-8);
  EXPECT_GT(ds.max_imag, 0.0);
  EXPECT_LE(s.residual, 1e-8);
  EXPECT_NE(s.method.find("Arnoldi"), std::string::npos) << s.method;
  EXPECT_TRUE(s.complex_principal == (std::abs(d.imag()) > 1e-6 * std::abs(d.real())));
}

TEST(Krylov, ForcedArnoldiAgreesWithLanczos) {
  Manifold M = curved_circle();
  auto op = discretize_laplacian(M.metric, Grid(M.metric.chart(), 160));
  EigenOptions o;
  o.force_arnoldi = true;
  o.max_multiplicity = 0;
  EXPECT_NEAR(principal_eigenvalue(op, o).lambda.real(), principal_eigenvalue(op).lambda.real(), 1e-9);
}

TEST(Krylov, SmallProblemsUseDenseFallback) {
  Manifold M = make_manifold("witten_torus_1d");
  auto op = discretize_drift_laplacian(M.metric, M.drift, Grid(M.metric.chart(), 12));
  auto s = principal_eigenvalue(op);
  EXPECT_NEAR(s.lambda.real(), dense_principal(dense_oracle(op)).real(), 1e-10);
}

TEST(Krylov, GmresSolvesPreconditionedSystem) {
  const int n = 60;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 4.0 + 0.1 * i;
    A(i, (i + 1) % n) = -1.0;
    A(i, (i + 7) % n) = 0.5;
  }
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
  auto r = gmres([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(A * v); }, b, A.diagonal(), 1e-12, 10, 1000);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((A * r.x - b).norm(), 1e-10 * b.norm());
}

TEST(Krylov, DenseSpectrumSortsByRealPart) {
  Eigen::MatrixXd M(3, 3);
  // M plays the role of L, so lambda = -eig(M)
  M << -2, 0, 0, 0, -0.5, 0, 0, 0, -1;
  auto s = dense_spectrum(M);
  EXPECT_NEAR(s.lambda[0].real(), 0.5, 1e-15);
  EXPECT_NEAR(s.lambda[2].real(), 2.0, 1e-15);
}

TEST(ComplexLaplacian, KahlerFlatTorusIsHalfTheLaplacian) {
  Manifold M = make_manifold("kahler_torus");
  Grid g(M.metric.chart(), 8);
  auto op = complex_laplacian_weak_form(*M.hermitian, g);
  EXPECT_EQ(op.symmetry, SymmetryClass::self_adjoint_weighted);
  EigenOptions o;
  o.max_multiplicity = 0;
  EXPECT_NEAR(principal_eigenvalue(op, o).lambda.real(), 0.5 * stencil_lambda(2 * M_PI, 8), 1e-9);
}

TEST(ComplexLaplacian, WeightIsExactForConformalAndNkMetrics) {
  Manifold C = make_manifold("conf_torus", {{"dim", "4"}});
  Grid g(C.metric.chart(), std::vector<int>{16, 4, 4, 4});
  auto w = complex_weight(*C.hermitian, g);
  EXPECT_TRUE(w.exact);
  EXPECT_LT(w.period_defect, 1e-6);
  // w = e^{2f} up to a constant, f = 0.1 cos x0
  for (size_t i = 0; i < g.size(); ++i) {
    double x0 = g.coords(i)[0];
    EXPECT_NEAR(w.log_w[i], 0.2 * (std::cos(x0) - 1.0), 1e-5);
  }
  Manifold N = make_manifold("nk_torus");
  auto wn = complex_weight(*N.hermitian, Grid(N.metric.chart(), 8));
  for (double v : wn.log_w) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(ComplexLaplacian, WeakFormMatchesDriftFormWithHalfFactor) {
  Manifold M = make_manifold("nk_torus");
  std::vector<double> h, r;
  for (int N : {12, 24}) {
    auto s = select_drift_factor(*M.hermitian, Grid(M.metric.chart(), std::vector<int>{6, 6, N, 6}));
    EXPECT_EQ(s.selected, -0.5);
    EXPECT_TRUE(s.determined);
    EXPECT_GT(s.literal_residual, 10 * s.residual);
    h.push_back(2 * M_PI / N);
    r.push_back(s.residual);
  }
  EXPECT_GT(observed_order(h, r), 1.5);
}

TEST(ComplexLaplacian, ConformalKahlerDriftFactor) {
  Manifold M = make_manifold("conf_torus", {{"dim", "4"}});
  auto s = select_drift_factor(*M.hermitian, Grid(M.metric.chart(), std::vector<int>{16, 4, 4, 4}));
  EXPECT_EQ(s.selected, -0.5);
  EXPECT_TRUE(s.determined);
}

TEST(Verify, GradientEstimateFaultIsDetected) {
  Manifold M = make_manifold("witten_torus_1d");
  Grid g(M.metric.chart(), 32);
  VerifyOptions o;
  o.throw_on_failure = false;
  auto v = verify_theorem1(M.metric, M.drift, g, o);
  EXPECT_TRUE(v.passed);
  EXPECT_TRUE(verify_gradient_estimate(M.metric, g, v.spectrum, v.bound.inputs, {2.0}).passed);
  EXPECT_FALSE(verify_gradient_estimate(M.metric, g, v.spectrum, v.bound.inputs, {2.0}, Fault::drop_gradient_rhs).passed);
  o.throw_on_failure = true;
  o.fault = Fault::scale_eigenvalue;
  EXPECT_THROW(verify_theorem1(M.metric, M.drift, g, o), VerificationFailure);
  EXPECT_THROW(parse_fault("bogus"), PreconditionError);
}

TEST(Verify, OneFormSupOfWittenDrift) {
  Manifold M = make_manifold("witten_torus_1d");
  auto s = one_form_sup(M.metric, M.drift, Grid(M.metric.chart(), 64), M.drift_invariant);
  EXPECT_NEAR(s.xi_sup, 0.5, 1e-12);
  EXPECT_NEAR(s.grad_xi_sup, 0.5, 1e-12);
}
