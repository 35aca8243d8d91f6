#pragma once

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "expr.hpp"
#include "hermitian.hpp"
#include "metric.hpp"

namespace driftlab {

enum class EntryKind { riemannian, hermitian, hermitian_pointwise_only };

inline const char* to_string(EntryKind k) {
  switch (k) {
    case EntryKind::riemannian: return "riemannian";
    case EntryKind::hermitian: return "hermitian";
    case EntryKind::hermitian_pointwise_only: return "hermitian-pointwise-only";
  }
  return "";
}

struct CatalogFact {
  std::string name;
  double value = 0.0;
  std::string source;  // how the value is known
};

struct CatalogEntry {
  std::string name;
  EntryKind kind = EntryKind::riemannian;
  std::string description;
  std::map<std::string, std::string> defaults;
};

inline std::vector<CatalogEntry> catalog_list() {
  return {
      {"flat_torus", EntryKind::riemannian, "flat torus R^n / (periods) Z^n, g = delta", {{"n", "2"}, {"period", "2*pi"}}},
      {"witten_torus_1d", EntryKind::riemannian, "circle of length 2 pi with gradient drift xi = d(a cos x0)", {{"a", "0.5"}}},
      {"conf_torus", EntryKind::hermitian, "g = e^{2f} delta on the 2 pi torus; dim 2 or 4 (h = e^{2f} I / 2)",
       {{"f", "0.1*cos(x0)"}, {"dim", "2"}}},
      {"kahler_torus", EntryKind::hermitian, "flat Kahler torus h = s I on the 2 pi torus", {{"nc", "2"}, {"scale", "0.5"}}},
      {"nk_torus", EntryKind::hermitian, "complex dim 2, h = diag(1 + eps sin x2, 1)", {{"eps", "0.1"}}},
      {"nk_torus3", EntryKind::hermitian, "complex dim 3, h = diag(1 + eps sin x2, 1, 1)", {{"eps", "0.1"}}},
      {"hopf", EntryKind::hermitian_pointwise_only, "Hopf surface, h = I / |z|^2 on C^2 minus 0 (no global periodic chart)", {}},
  };
}

struct Manifold {
  std::string name;
  EntryKind kind = EntryKind::riemannian;
  std::map<std::string, std::string> params;
  ChartedMetric metric;
  std::optional<HermitianStructure> hermitian;
  OneFormField drift;                 // drift of the Theorem 1 operator
  std::string drift_description;
  std::vector<bool> drift_invariant;  // axes along which the drift is constant
  FieldPtr flattening;                // f with e^{2f} g flat, when known
  std::vector<std::vector<double>> sample_points;
  std::vector<CatalogFact> facts;

  bool pointwise_only() const { return kind == EntryKind::hermitian_pointwise_only; }
  int dim() const { return metric.dim(); }
  std::string label() const {
    std::ostringstream os;
    os << name << "(";
    bool first = true;
    for (const auto& [k, v] : params) {
      os << (first ? "" : ",") << k << "=" << v;
      first = false;
    }
    os << ")";
    return os.str();
  }
};

inline double constant_value(const std::string& s) {
  Expr e = Expr::parse(s);
  if (e.max_var() >= 0) throw ParseError("parameter '" + s + "' must be a constant expression");
  return e.eval<double>(nullptr);
}

namespace detail {

inline std::vector<std::vector<double>> default_samples(int dim, const std::vector<double>& periods) {
  std::vector<std::vector<double>> out;
  for (double f : {0.0, 0.3, 0.61}) {
    std::vector<double> x(dim);
    for (int a = 0; a < dim; ++a) x[a] = std::fmod(f * (1.0 + 0.13 * a), 1.0) * periods[a];
    out.push_back(x);
  }
  return out;
}

}  // namespace detail

inline Manifold make_manifold(const std::string& name, std::map<std::string, std::string> params = {}) {
  const auto entries = catalog_list();
  auto it = std::find_if(entries.begin(), entries.end(), [&](const CatalogEntry& e) { return e.name == name; });
  if (it == entries.end()) throw PreconditionError("unknown manifold '" + name + "'");
  for (const auto& [k, v] : params)
    if (!it->defaults.count(k)) throw PreconditionError("manifold '" + name + "' has no parameter '" + k + "'");
  for (const auto& [k, v] : it->defaults) params.emplace(k, v);
  Manifold M;
  M.name = name;
  M.kind = it->kind;
  M.params = params;
  const double twopi = 2.0 * M_PI;

  if (name == "flat_torus") {
    const int n = static_cast<int>(constant_value(params["n"]));
    if (n < 1) throw PreconditionError("flat_torus needs n >= 1");
    // period: one value for all axes or a comma list
    std::vector<double> per;
    std::stringstream ss(params["period"]);
    for (std::string tok; std::getline(ss, tok, ',');) per.push_back(constant_value(tok));
    if (per.size() == 1) per.assign(n, per[0]);
    if (static_cast<int>(per.size()) != n) throw DimensionError("flat_torus period list has wrong length");
    auto g = make_field(n, n * n, [n](const auto* x, auto* o) {
      for (int i = 0; i < n * n; ++i) o[i] = 0.0 * x[0];
      for (int i = 0; i < n; ++i) o[i * n + i] = o[i * n + i] + 1.0;
    });
    M.metric = ChartedMetric(PeriodicChart(per), g, {}, std::vector<bool>(n, true));
    M.drift = OneFormField::zero(n);
    M.drift_description = "zero";
    M.drift_invariant.assign(n, true);
    M.flattening = make_field(n, 1, [](const auto* x, auto* o) { o[0] = 0.0 * x[0]; });
    double pmax = *std::max_element(per.begin(), per.end()), s2 = 0.0;
    for (double p : per) s2 += p * p;
    M.facts = {{"lambda1", std::pow(twopi / pmax, 2), "closed form (2 pi / longest period)^2"},
               {"diameter", 0.5 * std::sqrt(s2), "closed form half the diagonal"},
               {"ricci_lower_k", 0.0, "flat"}};
    M.sample_points = detail::default_samples(n, per);
    return M;
  }
  if (name == "witten_torus_1d") {
    const double a = constant_value(params["a"]);
    auto g = make_field(1, 1, [](const auto* x, auto* o) { o[0] = 1.0 + 0.0 * x[0]; });
    M.metric = ChartedMetric(PeriodicChart::uniform(1, twopi), g, {}, {true});
    M.drift = OneFormField::exact(make_field(1, 1, [a](const auto* x, auto* o) { o[0] = a * ad::cos(x[0]); }));
    M.drift_description = "d(a cos x0)";
    M.drift_invariant = {false};
    M.flattening = make_field(1, 1, [](const auto* x, auto* o) { o[0] = 0.0 * x[0]; });
    M.facts = {{"xi_sup", std::abs(a), "closed form sup |a sin x|"},
               {"grad_xi_sup", std::abs(a), "closed form sup |a cos x|"},
               {"diameter", M_PI, "closed form half the circumference"}};
    M.sample_points = detail::default_samples(1, {twopi});
    return M;
  }
  if (name == "conf_torus") {
    const int dim = static_cast<int>(constant_value(params["dim"]));
    if (dim != 2 && dim != 4 && dim != 6) throw PreconditionError("conf_torus dim must be 2, 4 or 6");
    auto fe = std::make_shared<Expr>(Expr::parse(params["f"]));
    if (fe->max_var() >= dim) throw ParseError("f uses a coordinate beyond dim");
    std::vector<bool> inv(dim);
    for (int a = 0; a < dim; ++a) inv[a] = !fe->uses(a);
    const int nc = dim / 2;
    auto h = make_field(dim, 2 * nc * nc, [fe, nc](const auto* x, auto* o) {
      auto e = 0.5 * ad::exp(2.0 * fe->eval(x));
      for (int i = 0; i < 2 * nc * nc; ++i) o[i] = 0.0 * e;
      for (int a = 0; a < nc; ++a) o[2 * (a * nc + a)] = e;
    });
    M.hermitian = HermitianStructure(PeriodicChart::uniform(dim, twopi), nc, h, {}, inv);
    M.metric = M.hermitian->induced_metric();
    if (nc == 1) {
      M.drift = OneFormField::zero(dim);
      M.drift_description = "zero (complex dimension 1 has no Lee form)";
      M.drift_invariant.assign(dim, true);
    } else {
      M.drift = lee_form_field(*M.hermitian);
      M.drift_description = "Lee form -(n_c - 1) df";
      M.drift_invariant = inv;
    }
    M.flattening = make_field(dim, 1, [fe](const auto* x, auto* o) { o[0] = -fe->eval(x); });
    M.sample_points = detail::default_samples(dim, std::vector<double>(dim, twopi));
    return M;
  }
  if (name == "kahler_torus") {
    const int nc = static_cast<int>(constant_value(params["nc"]));
    const double s = constant_value(params["scale"]);
    if (nc < 1 || !(s > 0.0)) throw PreconditionError("kahler_torus needs nc >= 1 and scale > 0");
    const int dim = 2 * nc;
    auto h = make_field(dim, 2 * nc * nc, [nc, s](const auto* x, auto* o) {
      for (int i = 0; i < 2 * nc * nc; ++i) o[i] = 0.0 * x[0];
      for (int a = 0; a < nc; ++a) o[2 * (a * nc + a)] = o[2 * (a * nc + a)] + s;
    });
    M.hermitian = HermitianStructure(PeriodicChart::uniform(dim, twopi), nc, h, {}, std::vector<bool>(dim, true));
    M.metric = M.hermitian->induced_metric();
    M.drift = OneFormField::zero(dim);
    M.drift_description = "zero (Kahler)";
    M.drift_invariant.assign(dim, true);
    M.flattening = make_field(dim, 1, [](const auto* x, auto* o) { o[0] = 0.0 * x[0]; });
    // g = 2 s delta: lambda1(Delta) = 1 / (2 s), lambda1(box) = half of it
    M.facts = {{"lambda1", 1.0 / (2.0 * s), "closed form for g = 2 s delta on the 2 pi torus"},
               {"lambda1_box", 1.0 / (4.0 * s), "half of lambda1 (zero torsion)"},
               {"eta_norm2", 0.0, "zero torsion"}};
    M.sample_points = detail::default_samples(dim, std::vector<double>(dim, twopi));
    return M;
  }
  if (name == "nk_torus" || name == "nk_torus3") {
    const double eps = constant_value(params["eps"]);
    if (!(std::abs(eps) < 1.0)) throw PreconditionError("nk_torus needs |eps| < 1");
    const int nc = name == "nk_torus" ? 2 : 3, dim = 2 * nc;
    auto h = make_field(dim, 2 * nc * nc, [nc, eps](const auto* x, auto* o) {
      for (int i = 0; i < 2 * nc * nc; ++i) o[i] = 0.0 * x[0];
      o[0] = 1.0 + eps * ad::sin(x[2]);
      for (int a = 1; a < nc; ++a) o[2 * (a * nc + a)] = o[2 * (a * nc + a)] + 1.0;
    });
    std::vector<bool> inv(dim, true);
    inv[2] = false;
    M.hermitian = HermitianStructure(PeriodicChart::uniform(dim, twopi), nc, h, {}, inv);
    M.metric = M.hermitian->induced_metric();
    M.drift = lee_form_field(*M.hermitian);
    M.drift_description = "Lee form";
    M.drift_invariant = inv;
    // at x2 = 0: eta_2 = eps / 2 in the coordinate normalization
    M.facts = {{"eta_2_at_origin", 0.5 * eps, "symbolic: eta_2 = d_2 log h_11 at x2 = 0"},
               {"eta_norm2_at_origin", 0.25 * eps * eps, "symbolic"}};
    M.sample_points = detail::default_samples(dim, std::vector<double>(dim, twopi));
    return M;
  }
  // hopf: no global periodic chart; the placeholder chart only carries the dimension
  const int nc = 2, dim = 4;
  auto h = make_field(dim, 2 * nc * nc, [](const auto* x, auto* o) {
    auto r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    for (int i = 0; i < 8; ++i) o[i] = 0.0 * r2;
    o[0] = 1.0 / r2;
    o[6] = 1.0 / r2;
  });
  M.hermitian = HermitianStructure(PeriodicChart::uniform(dim, 1e6), nc, h);
  M.metric = M.hermitian->induced_metric();
  M.drift = lee_form_field(*M.hermitian);
  M.drift_description = "Lee form";
  M.drift_invariant.assign(dim, false);
  M.facts = {{"eta_norm2", 1.0, "closed form: eta = -d log |z|^2 (type (1,0)), |eta|_h = 1"}};
  M.sample_points = {{1.0, 0.0, 0.0, 0.0}, {0.3, -0.7, 1.1, 0.2}, {1.5, 0.4, -0.2, 0.9}};
  return M;
}

inline void require_global(const Manifold& M) {
  if (M.pointwise_only()) throw PreconditionError(M.name + " is pointwise-only: it has no global periodic chart");
}

}  // namespace driftlab
