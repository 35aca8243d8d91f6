#pragma once

#include <bit>
#include <complex>
#include <vector>

#include "grid.hpp"
#include "hermitian.hpp"
#include "quadrature.hpp"

namespace driftlab {

// Dense exterior algebra on 2n generators: bit a is dz_a, bit n + a is dzbar_a.
struct Form {
  int n = 0;
  std::vector<cplx> c;
  Form() = default;
  explicit Form(int n_) : n(n_), c(size_t(1) << (2 * n_), cplx(0.0)) {}
  static Form one(int n) {
    Form f(n);
    f.c[0] = 1.0;
    return f;
  }
  static Form generator(int n, int bit) {
    Form f(n);
    f.c[size_t(1) << bit] = 1.0;
    return f;
  }
  cplx top() const { return c.back(); }
  Form& operator+=(const Form& o) {
    for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }
  Form& operator*=(cplx s) {
    for (auto& z : c) z *= s;
    return *this;
  }
  double max_abs() const {
    double m = 0.0;
    for (auto& z : c) m = std::max(m, std::abs(z));
    return m;
  }
};

// monomial sign for ma ^ mb, both sorted
inline int wedge_sign(unsigned ma, unsigned mb) {
  int s = 0;
  for (unsigned rest = mb; rest; rest &= rest - 1) {
    int bit = std::countr_zero(rest);
    s += std::popcount(ma >> (bit + 1));
  }
  return (s & 1) ? -1 : 1;
}

inline Form wedge(const Form& A, const Form& B) {
  Form out(A.n);
  for (unsigned ma = 0; ma < A.c.size(); ++ma) {
    if (A.c[ma] == cplx(0.0)) continue;
    for (unsigned mb = 0; mb < B.c.size(); ++mb) {
      if ((ma & mb) || B.c[mb] == cplx(0.0)) continue;
      out.c[ma | mb] += static_cast<double>(wedge_sign(ma, mb)) * A.c[ma] * B.c[mb];
    }
  }
  return out;
}

// omega = i h_{a bbar} dz_a ^ dzbar_b
inline Form kahler_form(const Eigen::MatrixXcd& H) {
  const int n = static_cast<int>(H.rows());
  Form w(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      unsigned lo = 1u << a, hi = 1u << (n + b);
      w.c[lo | hi] += cplx(0.0, 1.0) * H(a, b) * static_cast<double>(wedge_sign(lo, hi));
    }
  return w;
}

inline Form power(const Form& w, int k) {
  Form r = Form::one(w.n);
  for (int i = 0; i < k; ++i) r = wedge(r, w);
  return r;
}

// (1,0)-form sum_a v_a dz_a
inline Form one_form_10(const std::vector<cplx>& v) {
  const int n = static_cast<int>(v.size());
  Form f(n);
  for (int a = 0; a < n; ++a) f.c[1u << a] = v[a];
  return f;
}

// real 2-form components omega_{mu nu} of the Kahler form on real axes
inline Eigen::MatrixXd kahler_form_real(const Eigen::MatrixXcd& H) {
  const int n = static_cast<int>(H.rows()), m = 2 * n;
  const cplx I(0.0, 1.0);
  auto P = [&](int a, int mu) { return mu / 2 != a ? cplx(0.0) : (mu % 2 ? I : cplx(1.0)); };
  auto Q = [&](int b, int mu) { return mu / 2 != b ? cplx(0.0) : (mu % 2 ? -I : cplx(1.0)); };
  Eigen::MatrixXd w(m, m);
  for (int mu = 0; mu < m; ++mu)
    for (int nu = 0; nu < m; ++nu) {
      cplx s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += H(a, b) * (P(a, mu) * Q(b, nu) - P(a, nu) * Q(b, mu));
      w(mu, nu) = (I * s).real();
    }
  return w;
}

struct EtaOmegaCheck {
  std::vector<double> candidates;  // s in d omega^{n-1} = -2 (s eta) ^ omega^{n-1}
  std::vector<double> residuals;   // max pointwise residual per candidate
  double selected = 0.0;
  double residual = 0.0;
  bool determined = false;  // best residual below half the runner-up
};

inline EtaOmegaCheck check_eta_via_omega(const HermitianStructure& hs, const Grid& grid) {
  const int n = hs.nc(), m = 2 * n;
  if (n < 2) throw DimensionError("check_eta_via_omega needs n_c >= 2");
  EtaOmegaCheck out;
  out.candidates = {-0.5, 0.5, -1.0, 1.0, -2.0, 2.0};
  out.residuals.assign(out.candidates.size(), 0.0);
  const auto& inv = hs.invariant_axes();
  auto wpow = [&](const std::vector<double>& x) { return power(kahler_form(hs.h(x)), n - 1); };
  grid.for_each_reduced(inv, [&](size_t idx, const std::vector<double>& x, double) {
    Form domega(n);
    for (int mu = 0; mu < m; ++mu) {
      if (inv[mu]) continue;
      auto gx = [&](int s) { return grid.coords(grid.shift(idx, mu, s)); };
      // coordinates of wrapped neighbors differ by a period; the field is periodic so that is harmless
      Form fm2 = wpow(gx(-2)), fm1 = wpow(gx(-1)), fp1 = wpow(gx(1)), fp2 = wpow(gx(2));
      const double h = grid.h(mu);
      const int a = mu / 2;
      const cplx coef = (mu % 2 == 0) ? cplx(0.5) : cplx(0.0, -0.5);
      for (unsigned mask = 0; mask < fm1.c.size(); ++mask) {
        cplx d = (fm2.c[mask] - 8.0 * fm1.c[mask] + 8.0 * fp1.c[mask] - fp2.c[mask]) / (12.0 * h);
        if (d == cplx(0.0) || (mask & (1u << a))) continue;
        domega.c[mask | (1u << a)] += coef * d * static_cast<double>(wedge_sign(1u << a, mask));
      }
    }
    HermitianPoint hp = analyze(hs, x, 1);
    Form ew = wedge(one_form_10(hp.eta), wpow(x));
    for (size_t c = 0; c < out.candidates.size(); ++c) {
      double r = 0.0;
      for (size_t i = 0; i < ew.c.size(); ++i)
        r = std::max(r, std::abs(domega.c[i] + 2.0 * out.candidates[c] * ew.c[i]));
      out.residuals[c] = std::max(out.residuals[c], r);
    }
  });
  size_t best = 0;
  for (size_t c = 1; c < out.candidates.size(); ++c)
    if (out.residuals[c] < out.residuals[best]) best = c;
  double second = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < out.candidates.size(); ++c)
    if (c != best) second = std::min(second, out.residuals[c]);
  out.selected = out.candidates[best];
  out.residual = out.residuals[best];
  out.determined = out.residual < 0.5 * second;
  return out;
}

// sum_{a,b} h^{a bbar} d_bbar v_a for the coordinate (1,0)-form with real-axis
// derivatives dv[mu][a]
inline cplx trace_dbar(const HermitianPoint& hp, const std::vector<std::vector<cplx>>& dv) {
  const int n = hp.n;
  cplx s = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      cplx dbv = 0.5 * (dv[2 * b][a] + cplx(0.0, 1.0) * dv[2 * b + 1][a]);
      s += hp.Hinv(b, a) * dbv;
    }
  return s;
}

struct AlphaK {
  int n = 0, k = 0;
  double printed = 0.0;    // |eta|^2 coefficient (2k - 1)
  double corrected = 0.0;  // |eta|^2 coefficient 2(k - 1)
  double direct = 0.0;
  double direct_imag = 0.0;
  double residual = 0.0;            // |printed - direct|
  double residual_corrected = 0.0;  // |corrected - direct|
  double eta_trace = 0.0;           // eta_{i, ibar}, structure normalization
  double eta2 = 0.0, tau2 = 0.0;
  bool degenerate = false;  // k = n - 1: the |T|^2 term drops out
};

inline double alpha_k_formula(int n, int k, double eta_coef, double X, double eta2, double tau2) {
  return (2.0 * k / (double(n) * (n - 1) * (n - 2))) * (-(n - 2) * X + eta_coef * eta2 + (n - k - 1) * tau2);
}

namespace detail {
inline Form i_ddbar(const std::vector<std::vector<Form>>& dd, int n) {
  // dd[mu][nu] = d_mu d_nu F; returns i sum d_c d_ebar F dz_c ^ dzbar_e ^ F
  const cplx I(0.0, 1.0);
  Form out(n);
  const size_t sz = dd[0][0].c.size();
  for (int c = 0; c < n; ++c)
    for (int e = 0; e < n; ++e) {
      unsigned lo = 1u << c, hi = 1u << (n + e);
      int s0 = wedge_sign(lo, hi);
      for (unsigned mask = 0; mask < sz; ++mask) {
        if (mask & (lo | hi)) continue;
        cplx v = 0.25 * (dd[2 * c][2 * e].c[mask] + I * dd[2 * c][2 * e + 1].c[mask] - I * dd[2 * c + 1][2 * e].c[mask] +
                         dd[2 * c + 1][2 * e + 1].c[mask]);
        if (v == cplx(0.0)) continue;
        out.c[lo | hi | mask] += I * v * static_cast<double>(s0 * wedge_sign(lo | hi, mask));
      }
    }
  return out;
}
}  // namespace detail

// Direct value of i ddbar(omega^k) ^ omega^{n-k-1} / omega^n from second
// differences of the omega^k coefficients with spacing h per axis.
inline cplx alpha_k_direct(const HermitianStructure& hs, const std::vector<double>& p, int k, const std::vector<double>& hstep) {
  const int n = hs.nc(), m = 2 * n;
  const auto& inv = hs.invariant_axes();
  auto wk = [&](const std::vector<double>& x) { return power(kahler_form(hs.h(x)), k); };
  Form zero(n);
  std::vector<std::vector<Form>> dd(m, std::vector<Form>(m, zero));
  Form f0 = wk(p);
  auto at = [&](int mu, double s, int nu, double t) {
    std::vector<double> x = p;
    x[mu] += s * hstep[mu];
    if (nu >= 0) x[nu] += t * hstep[nu];
    return wk(x);
  };
  for (int mu = 0; mu < m; ++mu) {
    if (inv[mu]) continue;
    Form fp = at(mu, 1, -1, 0), fm = at(mu, -1, -1, 0);
    for (size_t i = 0; i < f0.c.size(); ++i) dd[mu][mu].c[i] = (fp.c[i] - 2.0 * f0.c[i] + fm.c[i]) / (hstep[mu] * hstep[mu]);
    for (int nu = mu + 1; nu < m; ++nu) {
      if (inv[nu]) continue;
      Form a = at(mu, 1, nu, 1), b = at(mu, 1, nu, -1), c = at(mu, -1, nu, 1), d = at(mu, -1, nu, -1);
      for (size_t i = 0; i < f0.c.size(); ++i) {
        cplx v = (a.c[i] - b.c[i] - c.c[i] + d.c[i]) / (4.0 * hstep[mu] * hstep[nu]);
        dd[mu][nu].c[i] = v;
        dd[nu][mu].c[i] = v;
      }
    }
  }
  Form w = kahler_form(hs.h(p));
  Form num = wedge(detail::i_ddbar(dd, n), power(w, n - k - 1));
  return num.top() / power(w, n).top();
}

inline AlphaK alpha_k(const HermitianStructure& hs, const std::vector<double>& p, int k, const std::vector<double>& hstep) {
  const int n = hs.nc();
  if (n < 3) throw DimensionError("alpha_k formula needs n_c >= 3");
  if (k < 1 || k > n - 1) throw PreconditionError("alpha_k needs 1 <= k <= n_c - 1");
  HermitianPoint hp = analyze(hs, p, 2);
  FrameQuantities q = frame_quantities(hp);
  std::vector<std::vector<cplx>> deta_s(hp.m, std::vector<cplx>(n));
  for (int mu = 0; mu < hp.m; ++mu)
    for (int a = 0; a < n; ++a) deta_s[mu][a] = -0.5 * hp.deta[mu][a];
  AlphaK r;
  r.n = n;
  r.k = k;
  r.eta_trace = trace_dbar(hp, deta_s).real();
  r.eta2 = q.eta_s2;
  r.tau2 = q.tau2;
  r.printed = alpha_k_formula(n, k, 2.0 * k - 1.0, r.eta_trace, r.eta2, r.tau2);
  r.corrected = alpha_k_formula(n, k, 2.0 * (k - 1.0), r.eta_trace, r.eta2, r.tau2);
  cplx d = alpha_k_direct(hs, p, k, hstep);
  r.direct = d.real();
  r.direct_imag = d.imag();
  r.residual = std::abs(r.printed - r.direct);
  r.residual_corrected = std::abs(r.corrected - r.direct);
  r.degenerate = (k == n - 1);
  return r;
}

inline AlphaK alpha_k(const HermitianStructure& hs, const std::vector<double>& p, int k, double h) {
  return alpha_k(hs, p, k, std::vector<double>(hs.real_dim(), h));
}

struct AlphaKSweep {
  int k = 0;
  double max_residual = 0.0, max_residual_corrected = 0.0, max_direct = 0.0;
};

// residual over grid nodes, second differences with the grid spacing
inline AlphaKSweep alpha_k_sweep(const HermitianStructure& hs, const Grid& grid, int k) {
  AlphaKSweep s;
  s.k = k;
  std::vector<double> h(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) h[a] = grid.h(a);
  grid.for_each_reduced(hs.invariant_axes(), [&](size_t, const std::vector<double>& x, double) {
    AlphaK a = alpha_k(hs, x, k, h);
    s.max_residual = std::max(s.max_residual, a.residual);
    s.max_residual_corrected = std::max(s.max_residual_corrected, a.residual_corrected);
    s.max_direct = std::max(s.max_direct, std::abs(a.direct));
  });
  return s;
}

}  // namespace driftlab
