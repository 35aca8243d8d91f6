#include <gtest/gtest.h>

#include "support.hpp"

using namespace driftlab;

TEST(Chart, CanonicalizeWrapsIntoFundamentalDomain) {
  PeriodicChart c({2 * M_PI, 1.0});
  auto p = c.canonicalize({-0.5, 3.25});
  EXPECT_NEAR(p[0], 2 * M_PI - 0.5, 1e-14);
  EXPECT_NEAR(p[1], 0.25, 1e-14);
  EXPECT_THROW(c.canonicalize({1.0}), IndexError);
  EXPECT_THROW(PeriodicChart({1.0, -2.0}), PreconditionError);
}

TEST(Grid, IndexShiftAndCoordsAgree) {
  Grid g(PeriodicChart({2 * M_PI, 3.0, 1.0}), std::vector<int>{4, 5, 3});
  EXPECT_EQ(g.size(), 60u);
  for (size_t i = 0; i < g.size(); ++i) {
    int mi[3];
    g.multi_index(i, mi);
    EXPECT_EQ(g.index(mi), i);
    for (int a = 0; a < 3; ++a) {
      EXPECT_EQ(g.shift(g.shift(i, a, 1), a, -1), i);
      int mj[3] = {mi[0], mi[1], mi[2]};
      mj[a] = (mi[a] + 1) % g.n(a);
      EXPECT_EQ(g.shift(i, a, 1), g.index(mj));
    }
    auto x = g.coords(i);
    EXPECT_NEAR(x[1], mi[1] * 3.0 / 5, 1e-14);
  }
  EXPECT_NEAR(g.max_h(), 2 * M_PI / 4, 1e-15);
  EXPECT_THROW(Grid(PeriodicChart::uniform(2, 1.0), std::vector<int>{4, 1}), PreconditionError);
  EXPECT_THROW(Grid(PeriodicChart::uniform(2, 1.0), std::vector<int>{4, 4, 4}), DimensionError);
}

TEST(Grid, ReducedVisitCoversEveryNode) {
  Grid g(PeriodicChart::uniform(3, 1.0), std::vector<int>{3, 4, 5});
  double total = 0.0;
  int visits = 0;
  g.for_each_reduced({true, false, true}, [&](size_t, const std::vector<double>& x, double mult) {
    EXPECT_EQ(x[0], 0.0);
    EXPECT_EQ(x[2], 0.0);
    total += mult;
    ++visits;
  });
  EXPECT_EQ(visits, 4);
  EXPECT_EQ(total, 60.0);
}

TEST(Jet, AnalyticMatchesCentralDifferences) {
  auto f = make_field(2, 2, [](const auto* x, auto* o) {
    o[0] = ad::sin(x[0]) * ad::exp(0.3 * x[1]);
    o[1] = ad::sqrt(2.0 + ad::cos(x[0] - 2.0 * x[1]));
  });
  double p[2] = {0.7, -0.4};
  Jet a = jet(*f, p, 2);
  Jet d = jet(*f, p, 2, {DerivScheme::central_difference, 1e-2});
  for (int c = 0; c < 2; ++c)
    for (int mu = 0; mu < 2; ++mu) {
      EXPECT_NEAR(a.d(mu, c), d.d(mu, c), 1e-8);
      for (int nu = 0; nu < 2; ++nu) EXPECT_NEAR(a.dd(mu, nu, c), d.dd(mu, nu, c), 1e-6);
    }
  // closed form
  EXPECT_NEAR(a.d(0, 0), std::cos(0.7) * std::exp(-0.12), 1e-15);
  EXPECT_NEAR(a.dd(0, 1, 0), 0.3 * std::cos(0.7) * std::exp(-0.12), 1e-15);
}

TEST(Jet, NonFiniteValuesAreRejected) {
  auto f = make_field(1, 1, [](const auto* x, auto* o) { o[0] = ad::log(x[0] - 1.0); });
  double p[1] = {0.5};
  EXPECT_THROW(jet(*f, p, 1), NumericalDomainError);
}

TEST(Expr, ParsesAndDifferentiates) {
  Expr e = Expr::parse("2*sin(x0)^2 + exp(x1)/3 - -x0");
  double x[2] = {0.4, 1.3};
  EXPECT_NEAR(e.eval(x), 2 * std::pow(std::sin(0.4), 2) + std::exp(1.3) / 3 + 0.4, 1e-14);
  EXPECT_EQ(e.max_var(), 1);
  EXPECT_TRUE(e.uses(0));
  EXPECT_FALSE(Expr::parse("cos(pi*x1)").uses(0));
  FieldPtr fp = expression_field(2, {"x0*x1", "sqrt(1 + x0^2)"});
  Jet j = jet(*fp, x, 1);
  EXPECT_NEAR(j.d(0, 0), 1.3, 1e-14);
  EXPECT_NEAR(j.d(0, 1), 0.4 / std::sqrt(1.16), 1e-14);
  EXPECT_THROW(Expr::parse("sin(x0"), ParseError);
  EXPECT_THROW(Expr::parse("foo(x0)"), ParseError);
  EXPECT_THROW(expression_field(2, {"x2"}), ParseError);
  EXPECT_NEAR(constant_value("2*pi"), 2 * M_PI, 1e-15);
}

TEST(Metric, ShapeAndSingularityChecks) {
  auto bad = make_field(2, 3, [](const auto* x, auto* o) { o[0] = o[1] = o[2] = 1.0 + 0.0 * x[0]; });
  EXPECT_THROW(ChartedMetric(PeriodicChart::uniform(2, 1.0), bad), DimensionError);
  auto sing = make_field(2, 4, [](const auto* x, auto* o) { o[0] = o[1] = o[2] = o[3] = 1.0 + 0.0 * x[0]; });
  ChartedMetric m(PeriodicChart::uniform(2, 1.0), sing);
  EXPECT_THROW(curvature(m, {0.1, 0.2}), SingularMetricError);
}

TEST(Tensor, ContractionRaisesAndLowers) {
  ChartedMetric m = testsupport::wobbly3();
  Eigen::MatrixXd g = m.g({0.3, 1.0, 2.0}), gi = g.inverse();
  TensorField G(3, {Variance::co, Variance::co}), Gi(3, {Variance::contra, Variance::contra});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G({i, j}) = g(i, j), Gi({i, j}) = gi(i, j);
  TensorField delta = contract(G, Gi, {{1, 0}});
  EXPECT_EQ(delta.rank(), 2);
  EXPECT_EQ(delta.slots()[0], Variance::co);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(delta({i, j}) - cplx(i == j ? 1.0 : 0.0)), 0.0, 1e-14);
  TensorField trace = contract(G, Gi, {{0, 0}, {1, 1}});
  EXPECT_EQ(trace.rank(), 0);
  EXPECT_NEAR(trace.data()[0].real(), 3.0, 1e-13);
  EXPECT_THROW(contract(G, G, {{0, 0}}), IndexError);
  EXPECT_THROW(G({0, 3}), IndexError);
}
