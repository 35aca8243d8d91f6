#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "certified.hpp"
#include "krylov.hpp"
#include "spectral.hpp"

namespace driftlab {

enum class Fault { none, inflate_bound, scale_eigenvalue, drop_gradient_rhs };

inline Fault parse_fault(const std::string& s) {
  if (s.empty() || s == "none") return Fault::none;
  if (s == "inflate_bound") return Fault::inflate_bound;
  if (s == "scale_eigenvalue") return Fault::scale_eigenvalue;
  if (s == "drop_gradient_rhs") return Fault::drop_gradient_rhs;
  throw PreconditionError("unknown fault '" + s + "'");
}
inline const char* to_string(Fault f) {
  switch (f) {
    case Fault::none: return "none";
    case Fault::inflate_bound: return "inflate_bound";
    case Fault::scale_eigenvalue: return "scale_eigenvalue";
    case Fault::drop_gradient_rhs: return "drop_gradient_rhs";
  }
  return "none";
}

struct VerifyOptions {
  EigenOptions eigen;
  Fault fault = Fault::none;
  int geometry_cap = 12;           // resolution cap for the diameter / Ricci grid
  std::vector<bool> xi_invariant;  // axes along which xi is constant (sampling shortcut)
  bool throw_on_failure = true;
};

// Coarser copy of `grid` for the diameter and Ricci estimates. The diameter
// pad is rigorous at any resolution, so a coarse grid only makes d larger.
inline Grid geometry_grid(const Grid& grid, int cap) {
  std::vector<int> r = grid.resolutions();
  for (int& v : r) v = std::max(3, std::min(v, cap));
  return Grid(grid.chart(), r);
}

struct OneFormSup {
  double xi_sup = 0.0, grad_xi_sup = 0.0, grad_xi_frobenius_sup = 0.0;
};

// grid sup of |xi|_g and of nabla_X xi(X) over unit X
inline OneFormSup one_form_sup(const ChartedMetric& m, const OneFormField& xi, const Grid& grid, std::vector<bool> invariant = {}) {
  const int n = m.dim();
  if (invariant.empty()) invariant.assign(n, false);
  for (int a = 0; a < n; ++a) invariant[a] = invariant[a] && m.invariant_axes()[a];
  OneFormSup s;
  std::vector<double> v(n), dv(n * n);
  grid.for_each_reduced(invariant, [&](size_t, const std::vector<double>& x, double) {
    xi.sample(x.data(), v.data(), dv.data());
    LeviCivita lc = levi_civita(m.jet(x.data(), 1));
    Eigen::Map<Eigen::VectorXd> xv(v.data(), n);
    s.xi_sup = std::max(s.xi_sup, std::sqrt(std::max(0.0, xv.dot(lc.ginv * xv))));
    Eigen::MatrixXd N(n, n);
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) {
        double t = dv[mu * n + nu];
        for (int r = 0; r < n; ++r) t -= lc.gamma(r, mu, nu) * v[r];
        N(mu, nu) = t;
      }
    s.grad_xi_sup = std::max(s.grad_xi_sup, sup_diagonal(N, lc.g));
    s.grad_xi_frobenius_sup =
        std::max(s.grad_xi_frobenius_sup, std::sqrt(std::max(0.0, (lc.ginv * N * lc.ginv * N.transpose()).trace())));
  });
  return s;
}

inline double discretization_tolerance(const Grid& grid, double lambda) {
  double hr = 0.0;
  for (int a = 0; a < grid.dim(); ++a) hr = std::max(hr, grid.h(a) / grid.chart().period(a));
  return 5.0 * hr * hr * lambda;
}

struct Theorem1Verification {
  BoundReport bound;
  SpectralResult spectrum;
  GlobalGeometryEstimates geometry;
  OneFormSup xi;
  double lambda1 = 0.0;
  double tol = 0.0;
  double slack = 0.0;  // lambda1 - bound
  bool passed = false;
  Fault fault = Fault::none;
};

inline std::string summary(const Theorem1Verification& v) {
  std::ostringstream os;
  os << "lambda1=" << v.lambda1 << " bound=" << v.bound.lambda_lower << " tol=" << v.tol << " slack=" << v.slack
     << " d=" << v.geometry.d << " k=" << v.geometry.k << " xi_sup=" << v.xi.xi_sup << " grad_xi_sup=" << v.xi.grad_xi_sup
     << " fault=" << to_string(v.fault);
  return os.str();
}

inline void apply_fault(Fault f, double& lambda, double& bound) {
  if (f == Fault::inflate_bound) bound = bound * 1e6 + 1e3;
  if (f == Fault::scale_eigenvalue) lambda *= 1e-6;
}

inline Theorem1Verification verify_theorem1(const ChartedMetric& m, const OneFormField& xi, const Grid& grid,
                                            const VerifyOptions& opt = {}) {
  Theorem1Verification v;
  v.fault = opt.fault;
  Grid gg = geometry_grid(grid, opt.geometry_cap);
  v.geometry = global_estimates(m, gg, {gg});
  v.xi = one_form_sup(m, xi, grid, opt.xi_invariant);
  DriftBoundInputs in{m.dim(), v.geometry.d, v.geometry.k, v.xi.xi_sup, v.xi.grad_xi_sup};
  v.bound = theorem1_bound(in);
  DiscreteOperator op = discretize_drift_laplacian(m, xi, grid);
  v.spectrum = principal_eigenvalue(op, opt.eigen);
  v.lambda1 = v.spectrum.lambda.real();
  double bound = v.bound.lambda_lower;
  apply_fault(opt.fault, v.lambda1, bound);
  v.bound.lambda_lower = bound;
  v.tol = discretization_tolerance(grid, std::abs(v.lambda1));
  v.slack = v.lambda1 - bound;
  v.passed = v.spectrum.converged && v.lambda1 >= bound - v.tol;
  if (!v.passed && opt.throw_on_failure) throw VerificationFailure("theorem 1 bound not verified", summary(v));
  return v;
}

struct GradientCheck {
  double beta = 0.0;
  double worst_slack = INFINITY;  // min over nodes of rhs (1 + tol) - lhs
  double worst_ratio = 0.0;       // max lhs / rhs
  size_t violations = 0;
};

struct GradientVerification {
  DriftBoundInputs inputs;
  double lambda = 0.0;
  double tol = 0.0;
  int modes = 0;
  std::vector<GradientCheck> checks;
  bool passed = true;
};

// |grad u|_g by centered differences at every node against
// (beta - u) sqrt(...) from the gradient estimate; u normalized to sup u = 1
inline GradientVerification verify_gradient_estimate(const ChartedMetric& m, const Grid& grid, const std::vector<Eigen::VectorXd>& us,
                                                     const DriftBoundInputs& in, double lambda, const std::vector<double>& betas,
                                                     Fault fault = Fault::none) {
  GradientVerification r;
  r.inputs = in;
  r.lambda = lambda;
  r.modes = static_cast<int>(us.size());
  r.tol = 5.0 * grid.max_h() * grid.max_h();
  const int n = grid.dim();
  const size_t N = grid.size();
  std::vector<double> gradnorm;
  std::vector<std::vector<double>> grads;
  std::vector<Eigen::MatrixXd> ginv(N);
  for (size_t i = 0; i < N; ++i) ginv[i] = checked_inverse(m.g(grid.coords(i)));
  for (double b : betas) r.checks.push_back({b});
  for (const auto& u0 : us) {
    Eigen::VectorXd u = u0;
    double hi = u.maxCoeff(), lo = u.minCoeff();
    if (std::abs(lo) > std::abs(hi)) u = -u, hi = -lo;
    u /= hi;
    for (size_t i = 0; i < N; ++i) {
      Eigen::VectorXd du(n);
      for (int a = 0; a < n; ++a) du[a] = (u[grid.shift(i, a, 1)] - u[grid.shift(i, a, -1)]) / (2.0 * grid.h(a));
      double lhs = std::sqrt(std::max(0.0, du.dot(ginv[i] * du)));
      for (auto& c : r.checks) {
        double rhs = gradient_estimate_rhs(in, c.beta, lambda, std::clamp(u[i], -1.0, 1.0));
        if (fault == Fault::drop_gradient_rhs) rhs = 0.0, lhs += 1.0;
        double slack = rhs * (1.0 + r.tol) - lhs;
        c.worst_slack = std::min(c.worst_slack, slack);
        if (rhs > 0.0) c.worst_ratio = std::max(c.worst_ratio, lhs / rhs);
        if (slack < 0.0) ++c.violations, r.passed = false;
      }
    }
  }
  return r;
}

inline GradientVerification verify_gradient_estimate(const ChartedMetric& m, const Grid& grid, const SpectralResult& s,
                                                     const DriftBoundInputs& in, const std::vector<double>& betas,
                                                     Fault fault = Fault::none) {
  std::vector<Eigen::VectorXd> us;
  for (const auto& mode : s.modes) {
    if (std::abs(mode.lambda.imag()) > 1e-6 * std::abs(mode.lambda.real())) continue;
    Eigen::VectorXd u = mode.vector.real();
    if (u.norm() < 1e-6 * mode.vector.norm()) u = mode.vector.imag();
    us.push_back(u);
  }
  return verify_gradient_estimate(m, grid, us, in, s.lambda.real(), betas, fault);
}

struct Theorem4Verification {
  Theorem4Certified bound;
  SpectralResult spectrum;
  double lambda1 = 0.0;
  double tol = 0.0;
  double slack = 0.0;
  double implied_C = 0.0;  // smallest C for which the displayed form holds at lambda1
  bool displayed_holds_C1 = false;
  bool passed = false;
  Fault fault = Fault::none;
  std::vector<std::string> operator_flags;
};

inline std::string summary(const Theorem4Verification& v) {
  std::ostringstream os;
  os << "lambda1=" << v.lambda1 << " certified=" << v.bound.certified.lambda_lower << " tol=" << v.tol << " slack=" << v.slack
     << " implied_C=" << v.implied_C << " fault=" << to_string(v.fault);
  return os.str();
}

inline Theorem4Verification verify_theorem4(const HermitianStructure& hs, const Grid& grid, const VerifyOptions& opt = {},
                                            double C_uniform = 1.0) {
  Theorem4Verification v;
  v.fault = opt.fault;
  v.bound = theorem4_certified(hs, grid, C_uniform, geometry_grid(grid, opt.geometry_cap));
  DiscreteOperator op = complex_laplacian_weak_form(hs, grid);
  v.operator_flags = op.flags;
  v.spectrum = principal_eigenvalue(op, opt.eigen);
  v.lambda1 = v.spectrum.lambda.real();
  double bound = v.bound.certified.lambda_lower;
  apply_fault(opt.fault, v.lambda1, bound);
  v.bound.certified.lambda_lower = bound;
  v.tol = discretization_tolerance(grid, std::abs(v.lambda1));
  v.slack = v.lambda1 - bound;
  const auto& g = v.bound.geometry;
  Theorem4Inputs ti{hs.nc(), g.d, g.k, v.bound.star_sup, v.bound.star_star_sup, 1.0};
  v.implied_C = v.lambda1 > 0.0 ? theorem4_implied_C(ti, v.lambda1) : INFINITY;
  v.displayed_holds_C1 = v.lambda1 >= theorem4_bound(ti).lambda_lower;
  v.passed = v.spectrum.converged && v.lambda1 >= bound - v.tol;
  if (!v.passed && opt.throw_on_failure) throw VerificationFailure("theorem 4 bound not verified", summary(v));
  return v;
}

}  // namespace driftlab
