#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace driftlab {

struct QuarticBound {
  double a = 0.0;           // A + sqrt(B + sqrt(C))
  double relaxed = 0.0;     // 2 sqrt(A^2 + B + sqrt(C))
};

inline QuarticBound quartic_root_bound(double A, double B, double C) {
  if (!(A >= 0.0 && B >= 0.0 && C >= 0.0)) throw PreconditionError("quartic_root_bound needs A, B, C >= 0");
  return {A + std::sqrt(B + std::sqrt(C)), 2.0 * std::sqrt(A * A + B + std::sqrt(C))};
}

inline double quartic_value(double A, double B, double C, double x) {
  return x * x * x * x - A * x * x * x - B * x * x - C;
}

struct DriftBoundInputs {
  int n = 1;
  double d = 1.0;
  double k = 0.0;
  double xi_sup = 0.0;
  double grad_xi_sup = 0.0;
  void validate() const {
    if (n < 1) throw PreconditionError("dimension must be >= 1");
    for (double v : {d, k, xi_sup, grad_xi_sup})
      if (!std::isfinite(v)) throw NumericalDomainError("bound inputs must be finite");
    if (!(d > 0.0)) throw PreconditionError("diameter must be positive");
    if (k < 0.0 || xi_sup < 0.0 || grad_xi_sup < 0.0) throw PreconditionError("k and drift norms must be nonnegative");
  }
  DriftBoundInputs rescaled(double rho) const {
    return {n, rho * d, k / (rho * rho), xi_sup / rho, grad_xi_sup / (rho * rho)};
  }
};

struct BoundReport {
  std::string name;
  DriftBoundInputs inputs;
  double D = 0.0, E = 0.0, E_raw = 0.0, DE = 0.0, x_star = 0.0;
  double lambda_lower = 0.0;
  double lambda_simplified = 0.0;  // second displayed form, when there is one
  std::map<std::string, std::string> sources;
  std::map<std::string, double> intermediates;
  std::vector<std::string> flags;
};

inline double theorem1_D(const DriftBoundInputs& in) { return 2.0 * in.n * in.d * in.d; }

inline double theorem1_E(const DriftBoundInputs& in) {
  const double n = in.n;
  return (1.0 / (2.0 * n)) * ((16.0 * n * n - 32.0 * n + 5.0) * in.xi_sup * in.xi_sup + 2.0 * (n - 1.0) * (n - 1.0) * in.k +
                              2.0 * (n - 1.0) * in.grad_xi_sup);
}

// ((1 + s)^2 - t) / exp(1 + s), s = sqrt(1 + 4t)
inline double theorem1_shape(double t) {
  double s = std::sqrt(1.0 + 4.0 * t);
  return ((1.0 + s) * (1.0 + s) - t) / std::exp(1.0 + s);
}

inline BoundReport theorem1_bound(const DriftBoundInputs& in) {
  in.validate();
  BoundReport r;
  r.name = "theorem1";
  r.inputs = in;
  r.D = theorem1_D(in);
  r.E_raw = theorem1_E(in);
  r.E = r.E_raw;
  if (r.E < 0.0) {
    r.E = 0.0;
    r.flags.push_back("negative E clamped to 0");
  }
  r.DE = r.D * r.E;
  r.x_star = std::exp(1.0 + std::sqrt(1.0 + 4.0 * r.DE));
  r.lambda_lower = theorem1_shape(r.DE) / r.D;
  return r;
}

// f(x) = ((log x)^2 - DE) / (D x), the bound for beta = x / (x - 1)
inline double theorem1_f(double D, double DE, double x) {
  double L = std::log(x);
  return (L * L - DE) / (D * x);
}

inline double theorem1_bound_beta(const DriftBoundInputs& in, double beta) {
  in.validate();
  if (!(beta > 1.0)) throw PreconditionError("beta must exceed 1");
  double E = std::max(0.0, theorem1_E(in));
  double L = std::log(beta / (beta - 1.0));
  return (beta - 1.0) / (2.0 * in.n * beta) * (L * L / (in.d * in.d) - 2.0 * in.n * E);
}

// exact maximizer of f: log x = 1 + sqrt(1 + DE)
inline BoundReport theorem1_bound_optimal(const DriftBoundInputs& in) {
  BoundReport r = theorem1_bound(in);
  r.name = "theorem1_optimal";
  double L = 1.0 + std::sqrt(1.0 + r.DE);
  r.x_star = std::exp(L);
  r.lambda_lower = theorem1_f(r.D, r.DE, r.x_star);
  return r;
}

struct BetaSweep {
  double best_beta = 0.0, best_value = -INFINITY, best_log_x = 0.0;
  double resolution = 0.0;  // spacing of log x near the optimum
};

// geometric grid of beta - 1 over (1e-6, 99], so that log(beta/(beta-1)) is finely covered
inline BetaSweep beta_sweep(const DriftBoundInputs& in, int samples = 200001) {
  BetaSweep s;
  const double lo = std::log(1e-6), hi = std::log(99.0);
  size_t best = 0;
  std::vector<double> betas(samples);
  for (int i = 0; i < samples; ++i) {
    double b = 1.0 + std::exp(lo + (hi - lo) * i / (samples - 1));
    betas[i] = b;
    double v = theorem1_bound_beta(in, b);
    if (v > s.best_value) {
      s.best_value = v;
      s.best_beta = b;
      best = i;
    }
  }
  s.best_log_x = std::log(s.best_beta / (s.best_beta - 1.0));
  size_t j = best + 1 < betas.size() ? best + 1 : best - 1;
  s.resolution = std::abs(std::log(betas[j] / (betas[j] - 1.0)) - s.best_log_x);
  return s;
}

inline double gradient_estimate_rhs(const DriftBoundInputs& in, double beta, double lambda, double u_val) {
  in.validate();
  if (!(beta > 1.0)) throw PreconditionError("beta must exceed 1");
  if (!(u_val >= -1.0 - 1e-12 && u_val <= 1.0 + 1e-12)) throw PreconditionError("u must be normalized to |u| <= 1");
  if (lambda < 0.0) throw PreconditionError("lambda must be nonnegative");
  const double n = in.n;
  double inner = (16.0 * n * n - 32.0 * n + 5.0) * in.xi_sup * in.xi_sup + 2.0 * (n - 1.0) * (n - 1.0) * in.k +
                 2.0 * (n - 1.0) * in.grad_xi_sup + 2.0 * n * (beta / (beta - 1.0)) * lambda;
  return (beta - u_val) * std::sqrt(std::max(0.0, inner));
}

struct Theorem4Inputs {
  int n_c = 1;
  double d = 1.0, k = 0.0, star_sup = 0.0, star_star_sup = 0.0, C = 1.0;
};

inline double theorem4_shape_prefactor(double n_c, double d) { return 1.0 / (4.0 * n_c * d * d); }

inline BoundReport theorem4_bound(const Theorem4Inputs& in) {
  if (!(in.C > 0.0)) throw PreconditionError("C_uniform must be positive");
  if (!(in.d > 0.0) || in.n_c < 1) throw PreconditionError("need d > 0 and n_c >= 1");
  BoundReport r;
  r.name = "theorem4";
  const double n = in.n_c;
  const double curv = in.k + in.star_sup + in.star_star_sup;
  const double K = n * n * curv * in.d * in.d;
  const double CK = in.C * K;
  const double s = std::sqrt(1.0 + 4.0 * CK);
  r.intermediates["K"] = K;
  r.intermediates["C"] = in.C;
  r.intermediates["CK"] = CK;
  r.lambda_lower = theorem4_shape_prefactor(n, in.d) * theorem1_shape(CK);
  r.lambda_simplified = (1.0 / (4.0 * n)) * (2.0 / (in.d * in.d) + 3.0 * in.C * n * n * curv) / std::exp(1.0 + s);
  r.flags.push_back("C_uniform is an assumption");
  return r;
}

// smallest C >= 0 for which the first displayed form stays below lambda
inline double theorem4_implied_C(const Theorem4Inputs& in, double lambda) {
  const double n = in.n_c;
  const double K = n * n * (in.k + in.star_sup + in.star_star_sup) * in.d * in.d;
  const double pre = 1.0 / (4.0 * n * in.d * in.d);
  if (pre * theorem1_shape(0.0) <= lambda) return 0.0;
  if (K <= 0.0) return INFINITY;
  double lo = 0.0, hi = 1.0;
  while (pre * theorem1_shape(hi * K) > lambda) {
    hi *= 2.0;
    if (hi > 1e300) return INFINITY;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (pre * theorem1_shape(mid * K) > lambda) lo = mid;
    else hi = mid;
  }
  return hi;
}

inline double harnack_gradient_bound(double K_low, double f_sup, double grad_f_sup, int n) {
  if (n < 2) throw PreconditionError("harnack bound needs n >= 2");
  if (K_low < 0.0 || f_sup < 0.0 || grad_f_sup < 0.0) throw PreconditionError("harnack inputs must be nonnegative");
  double B = 0.5 * grad_f_sup + f_sup * f_sup;
  double alpha = K_low + 0.5 * grad_f_sup;
  return std::sqrt((n - 1.0) * (B + std::sqrt(B * B + 2.0 * alpha / (n - 1.0))));
}

inline double harnack_ratio(double d, double phi_bound) {
  if (!(d > 0.0)) throw PreconditionError("harnack_ratio needs d > 0");
  return std::exp(d * phi_bound);
}

}  // namespace driftlab
