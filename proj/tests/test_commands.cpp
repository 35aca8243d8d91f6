#include <gtest/gtest.h>

#include "support.hpp"

using namespace driftlab;

namespace {
RunManifest manifest(const std::string& cmd, const std::string& manifold, const std::string& grid = "") {
  RunManifest m;
  m.command = cmd;
  m.manifold = manifold;
  if (!grid.empty()) m.grids = parse_grid_list(grid);
  return m;
}
}  // namespace

TEST(Commands, GridListParsing) {
  auto g = parse_grid_list("16,32");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[1], std::vector<int>{32});
  auto p = parse_grid_list("8x8x32x8");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], (std::vector<int>{8, 8, 32, 8}));
  EXPECT_THROW(parse_grid_list("16,abc"), ParseError);
  EXPECT_THROW(parse_grid_list("1"), ParseError);
  EXPECT_THROW(parse_grid_list("8x"), ParseError);
}

TEST(Commands, ManifestRoundTrip) {
  RunManifest m = manifest("verify", "conf_torus", "8x8x8x8,12");
  m.params["dim"] = "4";
  m.tol = 1e-9;
  m.seed = 99;
  m.fault = "inflate_bound";
  RunManifest r = manifest_from_json(json::parse(manifest_json(m).dump()));
  EXPECT_EQ(manifest_json(r), manifest_json(m));
  EXPECT_EQ(r.grids.size(), 2u);
  EXPECT_EQ(*r.tol, 1e-9);
}

TEST(Commands, CatalogListsEveryEntry) {
  auto r = run_command(manifest("catalog", ""));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["schema_version"], kSchemaVersion);
  EXPECT_EQ(r.report["result"]["entries"].size(), catalog_list().size());
}

TEST(Commands, ExitCodes) {
  EXPECT_EQ(run_command(manifest("spectrum", "nope")).exit_code, exit_usage);
  EXPECT_EQ(run_command(manifest("spectrum", "hopf")).exit_code, exit_usage);
  EXPECT_EQ(run_command(manifest("frobnicate", "flat_torus")).exit_code, exit_usage);
  RunManifest m = manifest("spectrum", "flat_torus", "8x8x8");
  EXPECT_EQ(run_command(m).exit_code, exit_usage);
  RunManifest bad = manifest("spectrum", "flat_torus");
  bad.params["q"] = "1";
  EXPECT_EQ(run_command(bad).exit_code, exit_usage);
  // a metric that goes negative is a numerical error, not a usage error
  json spec = {{"name", "broken"}, {"dim", 1}, {"periods", {"2*pi"}}, {"metric", {{"kind", "expression"}, {"params", {{"g", {"log(cos(x0) - 2)"}}}}}}};
  RunManifest num;
  num.command = "bound";
  num.manifold_spec = spec;
  num.grids = {{16}};
  EXPECT_EQ(run_command(num).exit_code, exit_numerical);
}

TEST(Commands, VerifyPassesAndFaultsFail) {
  RunManifest m = manifest("verify", "witten_torus_1d", "32");
  auto ok = run_command(m);
  EXPECT_EQ(ok.exit_code, exit_pass) << ok.first_failure;
  for (std::string f : {"scale_eigenvalue", "inflate_bound", "drop_gradient_rhs"}) {
    m.fault = f;
    auto r = run_command(m);
    EXPECT_EQ(r.exit_code, exit_assertion) << f;
    EXPECT_FALSE(r.first_failure.empty());
  }
}

TEST(Commands, ReportsAreDeterministic) {
  RunManifest m = manifest("spectrum", "witten_torus_1d", "32,64");
  auto a = run_command(m), b = run_command(m);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  auto ops = a.report["result"]["operators"];
  ASSERT_EQ(ops.size(), 1u);
  EXPECT_EQ(ops[0]["refinement"].size(), 2u);
  EXPECT_TRUE(ops[0]["extrapolated"].is_number());
}

TEST(Commands, ExpressionSpecMatchesBuiltin) {
  json spec = {{"name", "circle"},
               {"dim", 1},
               {"periods", {"2*pi"}},
               {"metric", {{"kind", "expression"}, {"params", {{"g", {"1"}}, {"drift", {"-0.5*sin(x0)"}}}}}}};
  Manifold A = manifold_from_spec(spec), B = make_manifold("witten_torus_1d");
  auto la = principal_eigenvalue(discretize_drift_laplacian(A.metric, A.drift, Grid(A.metric.chart(), 48))).lambda.real();
  auto lb = principal_eigenvalue(discretize_drift_laplacian(B.metric, B.drift, Grid(B.metric.chart(), 48))).lambda.real();
  EXPECT_NEAR(la, lb, 1e-10);
  json builtin = {{"name", "nk_torus"}, {"dim", 4}, {"metric", {{"kind", "builtin"}, {"params", {{"eps", "0.2"}}}}}};
  EXPECT_EQ(manifold_from_spec(builtin).params.at("eps"), "0.2");
  builtin["dim"] = 2;
  EXPECT_THROW(manifold_from_spec(builtin), DimensionError);
}

TEST(Commands, IdentitiesOnNkTorus) {
  RunManifest m = manifest("identities", "nk_torus", "8x8x12x8,8x8x24x8");
  auto r = run_command(m);
  EXPECT_EQ(r.exit_code, exit_pass) << r.first_failure;
  EXPECT_EQ(r.report["result"]["operator_factor"][0]["selected"], -0.5);
}

TEST(Commands, TableAndCsvRendering) {
  auto r = run_command(manifest("bound", "witten_torus_1d"));
  EXPECT_NE(render_table("bound", r).find("PASS"), std::string::npos);
  EXPECT_EQ(render_csv(r).rfind("assertion,status,detail\n", 0), 0u);
}
