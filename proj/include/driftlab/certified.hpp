#pragma once

#include "bounds.hpp"
#include "hermitian.hpp"
#include "riemann.hpp"

namespace driftlab {

// sup over unit X of |A(X,X)| for the symmetric part of A
inline double sup_diagonal(const Eigen::MatrixXd& A, const Eigen::MatrixXd& g) {
  Eigen::VectorXd ev = relative_eigenvalues(A, g);
  return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

struct LeeFormSup {
  double xi_sup = 0.0, grad_xi_sup = 0.0, grad_xi_frobenius_sup = 0.0;
  double eta_sup = 0.0;  // unitary-frame |eta| in the coordinate normalization
};

inline LeeFormSup lee_form_sup(const HermitianStructure& hs, const Grid& grid) {
  LeeFormSup s;
  grid.for_each_reduced(hs.invariant_axes(), [&](size_t, const std::vector<double>& x, double) {
    HermitianPoint hp = analyze(hs, x, 2);
    LeeFormJet L = lee_form_jet(hp);
    s.xi_sup = std::max(s.xi_sup, L.norm);
    s.grad_xi_sup = std::max(s.grad_xi_sup, sup_diagonal(L.nabla, hp.lc.g));
    s.grad_xi_frobenius_sup = std::max(s.grad_xi_frobenius_sup, L.nabla_norm);
    s.eta_sup = std::max(s.eta_sup, std::sqrt(frame_quantities(hp).eta2));
  });
  return s;
}

struct Theorem4Certified {
  BoundReport certified;   // bound for the complex Laplacian
  BoundReport laplacian;   // Theorem 1 for Delta + 2 xi, before halving
  BoundReport displayed;   // displayed form with the chosen C
  GlobalGeometryEstimates geometry;
  LeeFormSup lee;
  double star_sup = 0.0, star_star_sup = 0.0;
};

// complex Laplacian = 1/2 (Delta + 2 xi(grad)), so Theorem 1 runs on real
// dimension 2 n_c with doubled drift norms and the result is halved
inline Theorem4Certified theorem4_certified(const HermitianStructure& hs, const Grid& grid, double C_uniform,
                                            const Grid& geometry) {
  Theorem4Certified t;
  ChartedMetric g = hs.induced_metric();
  t.geometry = global_estimates(g, geometry, {geometry});
  t.lee = lee_form_sup(hs, grid);
  grid.for_each_reduced(hs.invariant_axes(), [&](size_t, const std::vector<double>& x, double) {
    StarNorms s = star_norms(hs, x);
    t.star_sup = std::max(t.star_sup, s.star);
    t.star_star_sup = std::max(t.star_star_sup, s.star_star);
  });
  DriftBoundInputs in{hs.real_dim(), t.geometry.d, t.geometry.k, 2.0 * t.lee.xi_sup, 2.0 * t.lee.grad_xi_sup};
  t.laplacian = theorem1_bound(in);
  t.certified = t.laplacian;
  t.certified.name = "theorem4_certified";
  t.certified.lambda_lower = 0.5 * t.laplacian.lambda_lower;
  t.certified.sources = {{"d", "diameter_upper on the induced metric"},
                            {"k", "ricci_lower_bound on the induced metric"},
                            {"xi_sup", "2 x grid sup of the Lee form"},
                            {"grad_xi_sup", "2 x grid sup of nabla_X xi(X), |X| = 1"}};
  t.certified.intermediates["xi_sup_raw"] = t.lee.xi_sup;
  t.certified.intermediates["grad_xi_sup_raw"] = t.lee.grad_xi_sup;
  t.displayed = theorem4_bound({hs.nc(), t.geometry.d, t.geometry.k, t.star_sup, t.star_star_sup, C_uniform});
  return t;
}

inline Theorem4Certified theorem4_certified(const HermitianStructure& hs, const Grid& grid, double C_uniform = 1.0) {
  return theorem4_certified(hs, grid, C_uniform, grid);
}

struct ConformalPipelineOptions {
  double flat_tol = 1e-8;
  int n_c = 0;                   // > 0: also bound the complex Laplacian of h = e^{-2f} h_flat
  std::vector<bool> f_invariant;  // axes along which f is constant
  double scalar_fd_step = 1e-4;
};

struct ConformalPipelineReport {
  int n = 0;
  double flatness_residual = 0.0;
  double d = 0.0, k = 0.0, K_low = 0.0;
  double F_sup = 0.0, grad_F_sup = 0.0;  // F = (n-2) S / (4 (n-1))
  double phi_bound = 0.0, harnack_ratio = 0.0;
  double grad_f_bound = 0.0;
  double f_base = 0.0, f_min = 0.0, f_max = 0.0;
  double ricci_deviation_sup = 0.0, hessian_diag = 0.0, hess_f_bound = 0.0;
  double exp_sup = 0.0;  // sup e^{-2f}
  double sampled_grad_f_sup = 0.0, sampled_f_min = 0.0, sampled_f_max = 0.0;
  BoundReport witten;   // Theorem 1 with drift grad e^{-2f}
  BoundReport box;      // complex Laplacian, when n_c > 0
  double lambda_lower = 0.0;
};

inline ConformalPipelineReport conformally_flat_pipeline(const ChartedMetric& metric, FieldPtr f, const Grid& grid,
                                                         ConformalPipelineOptions opt = {}) {
  const int n = metric.dim();
  if (n < 3) throw DimensionError("conformally_flat_pipeline needs dim >= 3");
  ConformalPipelineReport r;
  r.n = n;
  std::vector<bool> inv(n, false);
  if (!opt.f_invariant.empty())
    for (int a = 0; a < n; ++a) inv[a] = metric.invariant_axes()[a] && opt.f_invariant[a];

  FieldPtr base = metric.field();
  auto gt = make_field(n, n * n, [base, f, n](const auto* x, auto* out) {
    using S = std::remove_cv_t<std::remove_reference_t<decltype(x[0])>>;
    S fv[1];
    f->eval(x, fv);
    base->eval(x, out);
    S e = ad::exp(2.0 * fv[0]);
    for (int i = 0; i < n * n; ++i) out[i] = out[i] * e;
  });
  ChartedMetric flat(metric.chart(), gt, metric.deriv(), inv);
  ChartedMetric g(metric.chart(), metric.field(), metric.deriv(), inv);

  double minric = INFINITY;
  r.sampled_f_min = INFINITY;
  r.sampled_f_max = -INFINITY;
  grid.for_each_reduced(inv, [&](size_t, const std::vector<double>& x, double) {
    r.flatness_residual = std::max(r.flatness_residual, curvature(flat, x).riem.max_abs());
    CurvatureBundle cb = curvature(g, x);
    minric = std::min(minric, relative_eigenvalues(cb.ric, cb.g).minCoeff());
    r.ricci_deviation_sup = std::max(r.ricci_deviation_sup, ricci_deviation(cb));
    const double c = (n - 2.0) / (4.0 * (n - 1.0));
    r.F_sup = std::max(r.F_sup, std::abs(c * cb.scalar));
    Eigen::VectorXd dS(n);
    for (int a = 0; a < n; ++a) {
      std::vector<double> xp = x, xm = x;
      xp[a] += opt.scalar_fd_step;
      xm[a] -= opt.scalar_fd_step;
      dS(a) = (scalar_curvature(g, xp) - scalar_curvature(g, xm)) / (2.0 * opt.scalar_fd_step);
    }
    r.grad_F_sup = std::max(r.grad_F_sup, c * std::sqrt(std::max(0.0, dS.dot(cb.ginv * dS))));
    auto fj = detail::scalar_jet(*f, x, g.deriv());
    r.sampled_grad_f_sup = std::max(r.sampled_grad_f_sup, std::sqrt(std::max(0.0, fj.d.dot(cb.ginv * fj.d))));
    r.sampled_f_min = std::min(r.sampled_f_min, fj.v);
    r.sampled_f_max = std::max(r.sampled_f_max, fj.v);
  });
  if (r.flatness_residual > opt.flat_tol) throw FlatnessError("e^{2f} g is not flat within tolerance");

  r.K_low = std::max(0.0, -minric);
  auto geo = global_estimates(g, grid, {grid});
  r.d = geo.d;
  r.k = geo.k;
  r.phi_bound = harnack_gradient_bound(r.K_low, r.F_sup, r.grad_F_sup, n);
  r.harnack_ratio = harnack_ratio(r.d, r.phi_bound);
  r.grad_f_bound = 2.0 / (n - 2.0) * r.phi_bound;
  std::vector<double> x0(n, 0.0);
  r.f_base = (*f)(x0)[0];
  r.f_min = r.f_base - r.grad_f_bound * r.d;
  r.f_max = r.f_base + r.grad_f_bound * r.d;
  r.hessian_diag = hessian_diag_bound_value(r.ricci_deviation_sup, r.grad_f_bound * r.grad_f_bound, n);
  r.hess_f_bound = r.hessian_diag / (n - 2.0);
  r.exp_sup = std::exp(-2.0 * r.f_min);

  DriftBoundInputs wi{n, r.d, r.k, 2.0 * r.grad_f_bound * r.exp_sup,
                      (4.0 * r.grad_f_bound * r.grad_f_bound + 2.0 * r.hess_f_bound) * r.exp_sup};
  r.witten = theorem1_bound(wi);
  r.witten.name = "conformally_flat_witten";
  r.lambda_lower = r.witten.lambda_lower;
  if (opt.n_c > 0) {
    // Lee form of e^{-2f} times a flat Kahler metric is (n_c - 1) df
    const double c = opt.n_c - 1.0;
    DriftBoundInputs bi{n, r.d, r.k, 2.0 * c * r.grad_f_bound, 2.0 * c * r.hess_f_bound};
    r.box = theorem1_bound(bi);
    r.box.name = "conformally_flat_complex_laplacian";
    r.box.lambda_lower *= 0.5;
    r.lambda_lower = r.box.lambda_lower;
  }
  return r;
}

}  // namespace driftlab
