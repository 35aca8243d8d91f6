#pragma once

#include <json.hpp>
#include <string>

#include "catalog.hpp"
#include "forms.hpp"
#include "gauduchon.hpp"
#include "verify.hpp"

namespace driftlab {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline json cnum(cplx z) { return json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

inline json to_json_value(const BoundReport& r) {
  json j;
  j["name"] = r.name;
  j["inputs"] = {{"n", r.inputs.n}, {"d", num(r.inputs.d)}, {"k", num(r.inputs.k)}, {"xi_sup", num(r.inputs.xi_sup)},
                 {"grad_xi_sup", num(r.inputs.grad_xi_sup)}};
  j["D"] = num(r.D);
  j["E"] = num(r.E);
  j["E_raw"] = num(r.E_raw);
  j["DE"] = num(r.DE);
  j["x_star"] = num(r.x_star);
  j["lambda_lower"] = num(r.lambda_lower);
  j["lambda_simplified"] = num(r.lambda_simplified);
  json p = json::object();
  for (const auto& [k, v] : r.sources) p[k] = v;
  j["sources"] = p;
  json im = json::object();
  for (const auto& [k, v] : r.intermediates) im[k] = num(v);
  j["intermediates"] = im;
  j["flags"] = r.flags;
  return j;
}

inline json grid_json(const Grid& g) { return g.resolutions(); }

inline json to_json_value(const SpectralResult& r, const Grid& g, const std::string& manifold) {
  json j;
  j["manifold"] = manifold;
  j["grid"] = grid_json(g);
  j["method"] = r.method;
  j["lambda"] = cnum(r.lambda);
  j["residual"] = num(r.residual);
  j["converged"] = r.converged;
  j["multiplicity"] = r.multiplicity;
  j["complex_principal"] = r.complex_principal;
  j["applications"] = r.applications;
  j["bound"] = nullptr;
  j["slack"] = nullptr;
  j["flags"] = r.flags;
  json ref = json::array();
  for (const auto& e : r.refinement) ref.push_back({{"grid", e.grid}, {"h", num(e.h)}, {"lambda", cnum(e.lambda)}});
  j["refinement"] = ref;
  return j;
}

inline json to_json_value(const GlobalGeometryEstimates& g) {
  return {{"d", num(g.d)},
          {"k", num(g.k)},
          {"injectivity", num(g.injectivity)},
          {"resolution", g.resolution},
          {"graph_max", num(g.diameter.graph_max)},
          {"pad", num(g.diameter.pad)},
          {"ricci_min_eigenvalue", num(g.ricci.min_eigenvalue)}};
}

inline json to_json_value(const Theorem1Verification& v, const Grid& g, const std::string& manifold) {
  json j = to_json_value(v.spectrum, g, manifold);
  j["check"] = "theorem1";
  j["bound"] = num(v.bound.lambda_lower);
  j["slack"] = num(v.slack);
  j["tol"] = num(v.tol);
  j["passed"] = v.passed;
  j["fault"] = to_string(v.fault);
  j["geometry"] = to_json_value(v.geometry);
  j["xi"] = {{"xi_sup", num(v.xi.xi_sup)}, {"grad_xi_sup", num(v.xi.grad_xi_sup)}, {"grad_xi_frobenius_sup", num(v.xi.grad_xi_frobenius_sup)}};
  j["bound_report"] = to_json_value(v.bound);
  return j;
}

inline json to_json_value(const GradientVerification& v) {
  json c = json::array();
  for (const auto& k : v.checks)
    c.push_back({{"beta", k.beta}, {"worst_slack", num(k.worst_slack)}, {"worst_ratio", num(k.worst_ratio)}, {"violations", k.violations}});
  return {{"check", "gradient_estimate"}, {"lambda", num(v.lambda)}, {"tol", num(v.tol)}, {"modes", v.modes}, {"passed", v.passed}, {"betas", c}};
}

inline json to_json_value(const Theorem4Verification& v, const Grid& g, const std::string& manifold) {
  json j = to_json_value(v.spectrum, g, manifold);
  j["check"] = "theorem4";
  j["bound"] = num(v.bound.certified.lambda_lower);
  j["slack"] = num(v.slack);
  j["tol"] = num(v.tol);
  j["passed"] = v.passed;
  j["fault"] = to_string(v.fault);
  j["implied_C"] = num(v.implied_C);
  j["displayed_holds_C1"] = v.displayed_holds_C1;
  j["operator_flags"] = v.operator_flags;
  j["geometry"] = to_json_value(v.bound.geometry);
  j["star_sup"] = num(v.bound.star_sup);
  j["star_star_sup"] = num(v.bound.star_star_sup);
  j["certified"] = to_json_value(v.bound.certified);
  j["displayed"] = to_json_value(v.bound.displayed);
  return j;
}

inline json to_json_value(const ConformalPipelineReport& r) {
  return {{"n", r.n},
          {"flatness_residual", num(r.flatness_residual)},
          {"d", num(r.d)},
          {"k", num(r.k)},
          {"K_low", num(r.K_low)},
          {"F_sup", num(r.F_sup)},
          {"grad_F_sup", num(r.grad_F_sup)},
          {"phi_bound", num(r.phi_bound)},
          {"harnack_ratio", num(r.harnack_ratio)},
          {"grad_f_bound", num(r.grad_f_bound)},
          {"f_range", {num(r.f_min), num(r.f_max)}},
          {"sampled_f_range", {num(r.sampled_f_min), num(r.sampled_f_max)}},
          {"sampled_grad_f_sup", num(r.sampled_grad_f_sup)},
          {"hess_f_bound", num(r.hess_f_bound)},
          {"exp_sup", num(r.exp_sup)},
          {"witten", to_json_value(r.witten)},
          {"box", to_json_value(r.box)},
          {"lambda_lower", num(r.lambda_lower)}};
}

inline json to_json_value(const Lemma7Residuals& r) {
  return {{"id1", num(r.id1)}, {"id2", num(r.id2)}, {"id3_printed", num(r.id3_printed)}, {"id3", num(r.id3)}, {"id4", num(r.id4)}, {"h", num(r.h_step)}};
}

inline json to_json_value(const TorsionCurvatureIdentity& r) {
  return {{"lhs_literal", num(r.lhs_literal)}, {"lhs_bianchi", num(r.lhs_bianchi)}, {"lhs_pre", num(r.lhs_pre)},
          {"rhs", num(r.rhs)},           {"rhs_coordinate", num(r.rhs_coordinate)}, {"imag_max", num(r.imag_max)},
          {"residual_literal", num(r.residual_literal)}, {"residual", num(r.residual)}, {"residual_pre", num(r.residual_pre)}};
}

inline json to_json_value(const GauduchonL2& g) {
  return {{"eta_l2", num(g.eta_l2)},
          {"eta_l2_coordinate", num(g.eta_l2_coordinate)},
          {"riem_rhs", num(g.riem_rhs)},
          {"riem_rhs_l2", num(g.riem_rhs_l2)},
          {"refined_rhs", num(g.refined_rhs)},
          {"slack", num(g.slack)},
          {"slack_refined", num(g.slack_refined)},
          {"sum_R", num(g.sum_R)},
          {"identity_residual", num(g.identity_residual)},
          {"corrected_residual", num(g.corrected_residual)},
          {"volume", num(g.volume)}};
}

inline json manifold_json(const Manifold& M) {
  json p = json::object();
  for (const auto& [k, v] : M.params) p[k] = v;
  return {{"name", M.name}, {"params", p}};
}

}  // namespace driftlab

namespace driftlab {

// Manifold spec document: {name, dim, periods[], metric: {kind: builtin|expression, params}}.
// builtin: params are the catalog parameters of `name`.
// expression: params.g is a dim*dim list of component expressions in x0..x{dim-1};
// params.drift (optional) a dim list for the one-form.
inline Manifold manifold_from_spec(const json& spec) {
  const std::string name = spec.at("name").get<std::string>();
  const json& metric = spec.at("metric");
  const std::string kind = metric.value("kind", "builtin");
  std::map<std::string, std::string> params;
  if (metric.contains("params"))
    for (auto& [k, v] : metric.at("params").items())
      if (!(kind == "expression" && (k == "g" || k == "drift"))) params[k] = v.is_string() ? v.get<std::string>() : v.dump();
  if (kind == "builtin") {
    Manifold M = make_manifold(name, params);
    if (spec.contains("dim") && spec.at("dim").get<int>() != M.dim()) throw DimensionError("spec dim does not match the builtin entry");
    return M;
  }
  if (kind != "expression") throw ParseError("metric kind must be builtin or expression");
  const int dim = spec.at("dim").get<int>();
  std::vector<double> periods;
  for (const auto& p : spec.at("periods")) periods.push_back(p.is_string() ? constant_value(p.get<std::string>()) : p.get<double>());
  if (static_cast<int>(periods.size()) != dim) throw DimensionError("periods list has wrong length");
  std::vector<std::string> comps = metric.at("params").at("g").get<std::vector<std::string>>();
  if (static_cast<int>(comps.size()) != dim * dim) throw DimensionError("metric needs dim*dim components");
  Manifold M;
  M.name = name;
  M.kind = EntryKind::riemannian;
  M.params = params;
  M.params["metric"] = "expression";
  std::vector<bool> inv(dim, true);
  std::vector<std::string> all = comps;
  std::vector<std::string> drift;
  if (metric.at("params").contains("drift")) drift = metric.at("params").at("drift").get<std::vector<std::string>>();
  all.insert(all.end(), drift.begin(), drift.end());
  for (const auto& c : all) {
    Expr e = Expr::parse(c);
    for (int a = 0; a < dim; ++a)
      if (e.uses(a)) inv[a] = false;
  }
  std::vector<bool> metric_inv(dim, true);
  for (const auto& c : comps) {
    Expr e = Expr::parse(c);
    for (int a = 0; a < dim; ++a)
      if (e.uses(a)) metric_inv[a] = false;
  }
  M.metric = ChartedMetric(PeriodicChart(periods), expression_field(dim, comps), {}, metric_inv);
  if (drift.empty()) {
    M.drift = OneFormField::zero(dim);
    M.drift_description = "zero";
  } else {
    if (static_cast<int>(drift.size()) != dim) throw DimensionError("drift needs dim components");
    M.drift = OneFormField(expression_field(dim, drift));
    M.drift_description = "expression";
  }
  M.drift_invariant = inv;
  M.sample_points = detail::default_samples(dim, periods);
  return M;
}

}  // namespace driftlab
