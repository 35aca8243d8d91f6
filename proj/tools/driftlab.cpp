#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "driftlab.hpp"

using namespace driftlab;

namespace {

int emit(const RunManifest& m, const CommandResult& r) {
  if (!m.out.empty()) {
    std::filesystem::create_directories(m.out);
    std::ofstream(std::filesystem::path(m.out) / "manifest.json") << manifest_json(m).dump(2) << "\n";
    std::ofstream(std::filesystem::path(m.out) / (m.command + ".json")) << r.report.dump(2) << "\n";
    if (m.format == "csv") std::ofstream(std::filesystem::path(m.out) / (m.command + ".csv")) << render_csv(r);
    std::cout << render_table(m.command, r);
  } else if (m.format == "csv") {
    std::cout << render_csv(r);
  } else if (m.format == "table") {
    std::cout << render_table(m.command, r);
  } else {
    std::cout << r.report.dump(2) << "\n";
  }
  if (r.exit_code != exit_pass) std::cerr << "driftlab " << m.command << ": " << r.first_failure << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftlab: drift-Laplacian eigenvalue bounds on charted tori"};
  app.require_subcommand(0, 1);

  RunManifest m;
  std::vector<std::string> params;
  std::string grid, manifest_file, spec_file;
  std::optional<double> tol;
  std::string fault;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--manifold", m.manifold, "catalog entry name");
    sc->add_option("--manifold-spec", spec_file, "manifold spec document (JSON)");
    sc->add_option("--param", params, "entry parameter k=v (repeatable)");
    sc->add_option("--grid", grid, "refinement levels N[,N...]; a level may be per-axis, e.g. 8x8x32x8");
    sc->add_option("--tol", tol, "override residual tolerance");
    sc->add_option("--seed", m.seed, "64-bit seed for randomized parts");
    sc->add_option("--out", m.out, "output directory for manifest and reports");
    sc->add_option("--format", m.format, "json|csv|table")->check(CLI::IsMember({"json", "csv", "table"}));
    sc->add_option("--manifest", manifest_file, "re-run a manifest file");
  };
  auto* c_catalog = app.add_subcommand("catalog", "list builtin manifolds");
  c_catalog->add_option("--format", m.format, "json|csv|table")->check(CLI::IsMember({"json", "csv", "table"}));
  auto* c_spectrum = app.add_subcommand("spectrum", "principal eigenvalues with refinement history");
  auto* c_bound = app.add_subcommand("bound", "lower bounds from the geometry");
  auto* c_verify = app.add_subcommand("verify", "eigenvalue vs bound and the gradient estimate");
  auto* c_ident = app.add_subcommand("identities", "torsion and curvature identity residuals");
  for (auto* sc : {c_spectrum, c_bound, c_verify, c_ident}) common(sc);
  c_verify->add_flag("--fault-inject{scale_eigenvalue}", fault,
                     "negative control: scale_eigenvalue (default), inflate_bound or drop_gradient_rhs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : exit_usage;
  }
  CLI::App* sc = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
  if (!sc) {
    std::cout << app.help();
    return exit_usage;
  }

  try {
    if (!manifest_file.empty()) {
      std::ifstream in(manifest_file);
      if (!in) throw PreconditionError("cannot read manifest " + manifest_file);
      m = manifest_from_json(json::parse(in));
    } else {
      m.command = sc->get_name();
      for (const auto& p : params) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw ParseError("--param expects k=v, got '" + p + "'");
        m.params[p.substr(0, eq)] = p.substr(eq + 1);
      }
      if (!grid.empty()) m.grids = parse_grid_list(grid);
      m.tol = tol;
      if (!spec_file.empty()) {
        std::ifstream in(spec_file);
        if (!in) throw PreconditionError("cannot read manifold spec " + spec_file);
        m.manifold_spec = json::parse(in);
      }
      if (!fault.empty()) m.fault = fault;
    }
  } catch (const json::exception& e) {
    std::cerr << "driftlab: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    std::cerr << "driftlab: " << e.what() << "\n";
    return exit_usage;
  }
  return emit(m, run_command(m));
}
