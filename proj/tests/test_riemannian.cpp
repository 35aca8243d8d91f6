#include <gtest/gtest.h>

#include "support.hpp"

using namespace driftlab;

namespace {

ChartedMetric conformal2d() {
  auto g = make_field(2, 4, [](const auto* x, auto* o) {
    auto e = ad::exp(2.0 * (0.3 * ad::cos(x[0]) + 0.2 * ad::sin(x[1])));
    o[0] = e;
    o[1] = o[2] = 0.0 * e;
    o[3] = e;
  });
  return ChartedMetric(PeriodicChart::uniform(2, 2 * M_PI), g);
}

// Gaussian curvature of e^{2f} delta: K = -e^{-2f} (f_xx + f_yy)
double conformal2d_K(const std::vector<double>& p) {
  double f = 0.3 * std::cos(p[0]) + 0.2 * std::sin(p[1]);
  double lap = -0.3 * std::cos(p[0]) - 0.2 * std::sin(p[1]);
  return -std::exp(-2 * f) * lap;
}

ChartedMetric conformally_scaled(const ChartedMetric& m, FieldPtr f) {
  FieldPtr base = m.field();
  const int n = m.dim();
  auto g = make_field(n, n * n, [base, f, n](const auto* x, auto* out) {
    using S = std::remove_cv_t<std::remove_reference_t<decltype(x[0])>>;
    S fv[1];
    f->eval(x, fv);
    base->eval(x, out);
    for (int i = 0; i < n * n; ++i) out[i] = out[i] * ad::exp(2.0 * fv[0]);
  });
  return ChartedMetric(m.chart(), g);
}

}  // namespace

TEST(Curvature, FlatTorusIsFlat) {
  Manifold M = make_manifold("flat_torus", {{"n", "3"}});
  auto cb = curvature(M.metric, {0.4, 1.1, 5.0});
  EXPECT_EQ(cb.riem.max_abs(), 0.0);
  EXPECT_EQ(cb.scalar, 0.0);
}

TEST(Curvature, ConformalSurfaceMatchesClosedForm) {
  ChartedMetric m = conformal2d();
  for (const auto& p : testsupport::random_points(2, 20, 11)) {
    double K = conformal2d_K(p);
    auto cb = curvature(m, p);
    EXPECT_NEAR(cb.scalar, 2 * K, 1e-12);
    Eigen::MatrixXd g = m.g(p);
    EXPECT_NEAR((cb.ric - K * g).norm(), 0.0, 1e-12);
    EXPECT_NEAR(cb.riem(0, 1, 0, 1), -K * g(0, 0) * g(1, 1), 1e-12);
  }
}

TEST(Curvature, AlgebraicSymmetriesAndBianchi) {
  ChartedMetric m = testsupport::wobbly3();
  for (const auto& p : testsupport::random_points(3, 10, 5)) {
    Array4 R = curvature(m, p).riem;
    double d = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int e = 0; e < 3; ++e) {
            d = std::max(d, std::abs(R(a, b, c, e) + R(b, a, c, e)));
            d = std::max(d, std::abs(R(a, b, c, e) - R(c, e, a, b)));
            d = std::max(d, std::abs(R(a, b, c, e) + R(b, c, a, e) + R(c, a, b, e)));
          }
    EXPECT_LT(d, 1e-13);
    EXPECT_GT(R.max_abs(), 1e-3);
  }
}

TEST(Curvature, AnalyticAgreesWithFiniteDifferences) {
  ChartedMetric m = testsupport::wobbly3();
  ChartedMetric fd = m.with_scheme({DerivScheme::central_difference, 1e-3});
  std::vector<double> p{0.3, 2.2, 4.1};
  auto a = curvature(m, p), b = curvature(fd, p);
  EXPECT_NEAR(a.scalar, b.scalar, 1e-6);
  EXPECT_NEAR((a.ric - b.ric).norm(), 0.0, 1e-6);
}

TEST(Curvature, ScalarScalesInverselyWithMetric) {
  ChartedMetric m = testsupport::wobbly3();
  std::vector<double> p{1.0, 0.5, 2.0};
  for (double rho2 : {0.25, 4.0, 100.0}) EXPECT_NEAR(scalar_curvature(m.scaled(rho2), p) * rho2, scalar_curvature(m, p), 1e-12);
}

TEST(Curvature, ConformalFormulasMatchDirectRecomputation) {
  ChartedMetric m = testsupport::wobbly3();
  auto f = make_field(3, 1, [](const auto* x, auto* o) { o[0] = 0.2 * ad::sin(x[0]) + 0.1 * ad::cos(x[1] + x[2]); });
  ChartedMetric gt = conformally_scaled(m, f);
  for (const auto& p : testsupport::random_points(3, 5, 9)) {
    auto direct = curvature(gt, p);
    EXPECT_NEAR((conformal_ricci(m, *f, p) - direct.ric).norm(), 0.0, 1e-12);
    EXPECT_NEAR(conformal_scalar(m, *f, p), direct.scalar, 1e-12);
  }
  EXPECT_THROW(conformal_ricci(conformal2d(), *make_field(2, 1, [](const auto* x, auto* o) { o[0] = x[0]; }), {0.0, 0.0}),
               DimensionError);
}

TEST(Geometry, FlatTorusDiameterIsTightUpperBound) {
  Manifold M = make_manifold("flat_torus");
  const double exact = M_PI * std::sqrt(2.0);
  double prev = INFINITY;
  for (int N : {16, 32, 64}) {
    auto d = diameter_upper(M.metric, Grid(M.metric.chart(), N));
    EXPECT_GE(d.d, exact);
    EXPECT_LT(d.d - exact, prev);
    prev = d.d - exact;
    if (N == 64) {
      EXPECT_LE(d.d, exact * 1.035);
    }
  }
}

TEST(Geometry, CircleDiameterAndInjectivity) {
  Manifold M = make_manifold("witten_torus_1d");
  Grid g(M.metric.chart(), 64);
  auto d = diameter_upper(M.metric, g);
  EXPECT_GE(d.d, M_PI);
  EXPECT_LE(d.d, M_PI * 1.05);
  EXPECT_NEAR(injectivity_proxy(M.metric, g), M_PI, 1e-12);
}

TEST(Geometry, RicciLowerBoundOfConformalSurface) {
  ChartedMetric m = conformal2d();
  double kmin = INFINITY;
  Grid g(m.chart(), 32);
  for (size_t i = 0; i < g.size(); ++i) kmin = std::min(kmin, conformal2d_K(g.coords(i)));
  auto r = ricci_lower_bound(m, {Grid(m.chart(), 16), g});
  EXPECT_NEAR(r.k, std::max(0.0, -kmin), 1e-12);
  EXPECT_NEAR(r.min_eigenvalue, kmin, 1e-12);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_THROW(ricci_lower_bound(m, Grid(m.chart(), 3)), PreconditionError);
}
