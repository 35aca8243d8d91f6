#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "riemann.hpp"
#include "tensor.hpp"

namespace driftlab {

struct CArray3 {
  int n = 0;
  std::vector<cplx> a;
  CArray3() = default;
  explicit CArray3(int n_) : n(n_), a(static_cast<size_t>(n_) * n_ * n_, cplx(0.0)) {}
  cplx& operator()(int i, int j, int k) { return a[(i * n + j) * n + k]; }
  const cplx& operator()(int i, int j, int k) const { return a[(i * n + j) * n + k]; }
  double norm2() const {
    double s = 0.0;
    for (auto& z : a) s += std::norm(z);
    return s;
  }
};

struct CArray4 {
  int n = 0;
  std::vector<cplx> a;
  CArray4() = default;
  explicit CArray4(int n_) : n(n_), a(static_cast<size_t>(n_) * n_ * n_ * n_, cplx(0.0)) {}
  cplx& operator()(int i, int j, int k, int l) { return a[((i * n + j) * n + k) * n + l]; }
  const cplx& operator()(int i, int j, int k, int l) const { return a[((i * n + j) * n + k) * n + l]; }
  double norm2() const {
    double s = 0.0;
    for (auto& z : a) s += std::norm(z);
    return s;
  }
};

namespace detail {
// g = 2 Re(h_{ab} dz_a (x) dzbar_b) on real axes (x_a, y_a) = (2a, 2a+1);
// h stored as (re, im) pairs at 2 (a nc + b)
template <class S>
void induced_from_h(const S* h, S* g, int nc) {
  const int m = 2 * nc;
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      const S& re = h[2 * (a * nc + b)];
      const S& im = h[2 * (a * nc + b) + 1];
      const S& imT = h[2 * (b * nc + a) + 1];
      g[(2 * a) * m + 2 * b] = 2.0 * re;
      g[(2 * a + 1) * m + 2 * b + 1] = 2.0 * re;
      g[(2 * a) * m + 2 * b + 1] = 2.0 * im;
      g[(2 * a + 1) * m + 2 * b] = 2.0 * imT;
    }
}
}  // namespace detail

class HermitianStructure {
 public:
  HermitianStructure() = default;
  HermitianStructure(PeriodicChart chart, int nc, FieldPtr h, DerivOptions d = {}, std::vector<bool> invariant = {})
      : chart_(std::move(chart)), nc_(nc), h_(std::move(h)), deriv_(resolve_step(d, chart_)), invariant_(std::move(invariant)) {
    if (chart_.dim() != 2 * nc_) throw DimensionError("hermitian structure needs real dim = 2 n_c");
    if (h_->dim() != 2 * nc_ || h_->ncomp() != 2 * nc_ * nc_) throw DimensionError("h field has wrong shape");
    if (invariant_.empty()) invariant_.assign(2 * nc_, false);
  }

  const PeriodicChart& chart() const { return chart_; }
  int nc() const { return nc_; }
  int real_dim() const { return 2 * nc_; }
  const FieldPtr& field() const { return h_; }
  const DerivOptions& deriv() const { return deriv_; }
  const std::vector<bool>& invariant_axes() const { return invariant_; }

  Eigen::MatrixXcd h(const double* p) const {
    std::vector<double> v(2 * nc_ * nc_);
    h_->eval(p, v.data());
    detail::check_finite(v.data(), static_cast<int>(v.size()), "hermitian metric evaluation");
    return unpack(v.data());
  }
  Eigen::MatrixXcd h(const std::vector<double>& p) const { return h(p.data()); }
  Eigen::MatrixXcd unpack(const double* v) const {
    Eigen::MatrixXcd H(nc_, nc_);
    for (int a = 0; a < nc_; ++a)
      for (int b = 0; b < nc_; ++b) H(a, b) = cplx(v[2 * (a * nc_ + b)], v[2 * (a * nc_ + b) + 1]);
    return H;
  }

  Jet jet(const double* p, int order) const { return driftlab::jet(*h_, p, order, deriv_); }

  ChartedMetric induced_metric() const {
    FieldPtr base = h_;
    const int nc = nc_, m = 2 * nc_;
    auto g = make_field(m, m * m, [base, nc](const auto* x, auto* out) {
      using S = std::remove_cv_t<std::remove_reference_t<decltype(x[0])>>;
      std::vector<S> hv(2 * nc * nc);
      base->eval(x, hv.data());
      detail::induced_from_h(hv.data(), out, nc);
    });
    return ChartedMetric(chart_, g, deriv_, invariant_);
  }

  HermitianStructure with_scheme(DerivOptions d) const { return HermitianStructure(chart_, nc_, h_, d, invariant_); }

  HermitianStructure scaled(double rho2) const {
    FieldPtr base = h_;
    const int nc = nc_;
    auto f = make_field(2 * nc, 2 * nc * nc, [base, rho2, nc](const auto* x, auto* out) {
      base->eval(x, out);
      for (int i = 0; i < 2 * nc * nc; ++i) out[i] = out[i] * rho2;
    });
    return HermitianStructure(chart_, nc_, f, deriv_, invariant_);
  }

 private:
  PeriodicChart chart_;
  int nc_ = 0;
  FieldPtr h_;
  DerivOptions deriv_;
  std::vector<bool> invariant_;
};

// Everything the pointwise operations need, computed once from the jet of h.
// Real axis mu, complex index a: d_a = (d_{2a} - i d_{2a+1}) / 2.
struct HermitianPoint {
  int n = 0, m = 0, order = 0;
  std::vector<double> p;
  Eigen::MatrixXcd H, Hinv;
  std::vector<Eigen::MatrixXcd> dHr;                // d_mu H
  std::vector<std::vector<Eigen::MatrixXcd>> ddHr;  // d_mu d_nu H
  std::vector<Eigen::MatrixXcd> dH, dbH;            // d_a H, d_abar H
  CArray3 gamma;                                    // Chern Gamma^b_{ac} = h^{b dbar} d_a h_{c dbar}
  CArray3 T;                                        // T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}, coordinates
  std::vector<cplx> eta;                            // eta_k = sum_i T^i_{ki}, coordinates
  CArray4 Rh;                                       // R^h_{a bbar c dbar}, coordinates
  std::vector<CArray3> dgamma;                      // d_mu Gamma
  std::vector<CArray3> dT;                          // d_mu T
  std::vector<std::vector<cplx>> deta;              // d_mu eta
  LeviCivita lc;                                    // of the induced metric
};

inline HermitianPoint analyze(const HermitianStructure& hs, const std::vector<double>& p, int order = 2) {
  HermitianPoint hp;
  const int n = hs.nc(), m = 2 * n;
  hp.n = n; hp.m = m; hp.order = order; hp.p = p;
  Jet j = hs.jet(p.data(), order);
  hp.H = hs.unpack(j.v.data());
  {
    Eigen::LLT<Eigen::MatrixXcd> llt(hp.H);
    if (llt.info() != Eigen::Success) throw SingularMetricError("hermitian metric not positive definite");
    hp.Hinv = llt.solve(Eigen::MatrixXcd::Identity(n, n));
  }
  // metric jet of the induced g, by linearity from the h jet
  Jet gj;
  gj.m = m; gj.nc = m * m; gj.order = order;
  gj.v.resize(m * m);
  detail::induced_from_h(j.v.data(), gj.v.data(), n);
  const int hc = 2 * n * n;
  std::vector<double> tmp(hc);
  if (order >= 1) {
    gj.d1.resize(m * m * m);
    hp.dHr.resize(m);
    for (int mu = 0; mu < m; ++mu) {
      for (int c = 0; c < hc; ++c) tmp[c] = j.d(mu, c);
      hp.dHr[mu] = hs.unpack(tmp.data());
      detail::induced_from_h(tmp.data(), gj.d1.data() + mu * m * m, n);
    }
  }
  if (order >= 2) {
    gj.d2.resize(m * m * m * m);
    hp.ddHr.assign(m, std::vector<Eigen::MatrixXcd>(m));
    for (int mu = 0; mu < m; ++mu)
      for (int nu = 0; nu < m; ++nu) {
        for (int c = 0; c < hc; ++c) tmp[c] = j.dd(mu, nu, c);
        hp.ddHr[mu][nu] = hs.unpack(tmp.data());
        detail::induced_from_h(tmp.data(), gj.d2.data() + (mu * m + nu) * m * m, n);
      }
  }
  hp.lc = levi_civita(gj);
  if (order < 1) return hp;

  const cplx I(0.0, 1.0);
  hp.dH.resize(n);
  hp.dbH.resize(n);
  for (int a = 0; a < n; ++a) {
    hp.dH[a] = 0.5 * (hp.dHr[2 * a] - I * hp.dHr[2 * a + 1]);
    hp.dbH[a] = 0.5 * (hp.dHr[2 * a] + I * hp.dHr[2 * a + 1]);
  }
  hp.gamma = CArray3(n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        cplx s = 0.0;
        for (int d = 0; d < n; ++d) s += hp.Hinv(d, b) * hp.dH[a](c, d);
        hp.gamma(b, a, c) = s;
      }
  hp.T = CArray3(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) hp.T(k, i, jj) = hp.gamma(k, i, jj) - hp.gamma(k, jj, i);
  hp.eta.assign(n, cplx(0.0));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) hp.eta[k] += hp.T(i, k, i);
  if (order < 2) return hp;

  // d_a d_bbar H = (d_{x_a} - i d_{y_a})(d_{x_b} + i d_{y_b}) H / 4
  hp.Rh = CArray4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Eigen::MatrixXcd ddb = 0.25 * (hp.ddHr[2 * a][2 * b] + I * hp.ddHr[2 * a][2 * b + 1] -
                                     I * hp.ddHr[2 * a + 1][2 * b] + hp.ddHr[2 * a + 1][2 * b + 1]);
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          cplx s = -ddb(c, d);
          for (int pp = 0; pp < n; ++pp)
            for (int f = 0; f < n; ++f) s += hp.Hinv(f, pp) * hp.dH[a](c, f) * hp.dbH[b](pp, d);
          hp.Rh(a, b, c, d) = s;
        }
    }
  hp.dT.assign(m, CArray3(n));
  hp.dgamma.assign(m, CArray3(n));
  hp.deta.assign(m, std::vector<cplx>(n, cplx(0.0)));
  for (int mu = 0; mu < m; ++mu) {
    Eigen::MatrixXcd dHinv = -hp.Hinv * hp.dHr[mu] * hp.Hinv;
    CArray3 dG(n);
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        Eigen::MatrixXcd dmda = 0.5 * (hp.ddHr[mu][2 * a] - I * hp.ddHr[mu][2 * a + 1]);
        for (int c = 0; c < n; ++c) {
          cplx s = 0.0;
          for (int d = 0; d < n; ++d) s += dHinv(d, b) * hp.dH[a](c, d) + hp.Hinv(d, b) * dmda(c, d);
          dG(b, a, c) = s;
        }
      }
    hp.dgamma[mu] = dG;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) hp.dT[mu](k, i, jj) = dG(k, i, jj) - dG(k, jj, i);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) hp.deta[mu][k] += hp.dT[mu](i, k, i);
  }
  return hp;
}

// Unitary frame e_i = sum_a E(a,i) d_a with h(e_i, ebar_j) = delta_ij, i.e.
// E^T H conj(E) = I; E = L^{-H} where H^T = L L^H.
inline Eigen::MatrixXcd unitary_frame(const Eigen::MatrixXcd& H) {
  Eigen::MatrixXcd A = H.transpose();
  Eigen::LLT<Eigen::MatrixXcd> llt(A);
  if (llt.info() != Eigen::Success) throw SingularMetricError("hermitian metric not positive definite");
  Eigen::MatrixXcd L = llt.matrixL();
  return L.adjoint().inverse();
}
inline Eigen::MatrixXcd unitary_frame(const HermitianStructure& hs, const std::vector<double>& p) {
  return unitary_frame(hs.h(p));
}

inline double frame_orthonormality_defect(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& E) {
  Eigen::MatrixXcd G = E.transpose() * H * E.conjugate();
  return (G - Eigen::MatrixXcd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

// derivative of the Cholesky frame along real axis mu
inline Eigen::MatrixXcd unitary_frame_derivative(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& dH) {
  const int n = static_cast<int>(H.rows());
  Eigen::LLT<Eigen::MatrixXcd> llt(H.transpose());
  if (llt.info() != Eigen::Success) throw SingularMetricError("hermitian metric not positive definite");
  Eigen::MatrixXcd L = llt.matrixL();
  Eigen::MatrixXcd Linv = L.inverse();
  Eigen::MatrixXcd X = Linv * dH.transpose() * Linv.adjoint();
  Eigen::MatrixXcd Phi = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) Phi(i, j) = X(i, j);
    Phi(i, i) = 0.5 * X(i, i);
  }
  Eigen::MatrixXcd dL = L * Phi;
  Eigen::MatrixXcd E = L.adjoint().inverse();
  return -E * dL.adjoint() * E;
}

// Real-direction Chern connection matrix in the holomorphic coordinate frame:
// nabla_{d_mu} d_b = sum_c G_mu(c,b) d_c with G_{x_a} = Gamma_a, G_{y_a} = i Gamma_a.
inline Eigen::MatrixXcd holomorphic_connection(const HermitianPoint& hp, int mu) {
  const int n = hp.n, a = mu / 2;
  const cplx coef = (mu % 2 == 0) ? cplx(1.0) : cplx(0.0, 1.0);
  Eigen::MatrixXcd G(n, n);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b) G(c, b) = coef * hp.gamma(c, a, b);
  return G;
}

// theta_mu(k,j): nabla_{d_mu} e_j = sum_k theta_mu(k,j) e_k, for the frame E(x)
// with derivative dE_mu at the point
inline std::vector<Eigen::MatrixXcd> chern_connection(const HermitianPoint& hp, const Eigen::MatrixXcd& E,
                                                      const std::vector<Eigen::MatrixXcd>& dE) {
  std::vector<Eigen::MatrixXcd> th(hp.m);
  Eigen::MatrixXcd Einv = E.inverse();
  for (int mu = 0; mu < hp.m; ++mu) th[mu] = Einv * (dE[mu] + holomorphic_connection(hp, mu) * E);
  return th;
}
inline std::vector<Eigen::MatrixXcd> chern_connection(const HermitianPoint& hp) {
  Eigen::MatrixXcd E = unitary_frame(hp.H);
  std::vector<Eigen::MatrixXcd> dE(hp.m);
  for (int mu = 0; mu < hp.m; ++mu) dE[mu] = unitary_frame_derivative(hp.H, hp.dHr[mu]);
  return chern_connection(hp, E, dE);
}

// complex vector components of e_i on the real axes
inline Eigen::MatrixXcd real_components(const Eigen::MatrixXcd& E) {
  const int n = static_cast<int>(E.rows()), k = static_cast<int>(E.cols());
  Eigen::MatrixXcd V(2 * n, k);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < k; ++i) {
      V(2 * a, i) = 0.5 * E(a, i);
      V(2 * a + 1, i) = cplx(0.0, -0.5) * E(a, i);
    }
  return V;
}

// out(i,j,k,l) = sum R(mu,nu,rho,sigma) A(mu,i) B(nu,j) C(rho,k) D(sigma,l)
inline CArray4 complexify(const Array4& R, const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                          const Eigen::MatrixXcd& C, const Eigen::MatrixXcd& D) {
  const int m = R.n, n = static_cast<int>(A.cols());
  std::vector<cplx> t1(static_cast<size_t>(m) * m * m * n), t2(static_cast<size_t>(m) * m * n * n),
      t3(static_cast<size_t>(m) * n * n * n);
  for (int mu = 0; mu < m; ++mu)
    for (int nu = 0; nu < m; ++nu)
      for (int r = 0; r < m; ++r)
        for (int l = 0; l < n; ++l) {
          cplx s = 0.0;
          for (int sg = 0; sg < m; ++sg) s += R(mu, nu, r, sg) * D(sg, l);
          t1[((mu * m + nu) * m + r) * n + l] = s;
        }
  for (int mu = 0; mu < m; ++mu)
    for (int nu = 0; nu < m; ++nu)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cplx s = 0.0;
          for (int r = 0; r < m; ++r) s += t1[((mu * m + nu) * m + r) * n + l] * C(r, k);
          t2[((mu * m + nu) * n + k) * n + l] = s;
        }
  for (int mu = 0; mu < m; ++mu)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cplx s = 0.0;
          for (int nu = 0; nu < m; ++nu) s += t2[((mu * m + nu) * n + k) * n + l] * B(nu, j);
          t3[((mu * n + j) * n + k) * n + l] = s;
        }
  CArray4 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cplx s = 0.0;
          for (int mu = 0; mu < m; ++mu) s += t3[((mu * n + j) * n + k) * n + l] * A(mu, i);
          out(i, j, k, l) = s;
        }
  return out;
}

// Frame components of torsion and curvature. T is in the coordinate
// normalization above; tau = T/2 is the normalization in which the quoted
// structure identities hold.
struct FrameQuantities {
  Eigen::MatrixXcd E;
  CArray3 T;              // T^c_{ab}
  CArray3 tau;            // T / 2
  std::vector<cplx> eta;  // eta_i = sum_a eta_a E(a,i)
  std::vector<cplx> eta_s;  // -eta / 2
  CArray4 Rh;             // R^h_{i jbar k lbar}
  CArray4 R_jl;           // R_{i jbar k lbar}
  CArray4 R_kl;           // R_{i j kbar lbar}
  CArray4 R_l;            // R_{i j k lbar}
  double T2 = 0.0, eta2 = 0.0, tau2 = 0.0, eta_s2 = 0.0;
};

inline FrameQuantities frame_quantities(const HermitianPoint& hp, const Eigen::MatrixXcd& E) {
  const int n = hp.n;
  FrameQuantities q;
  q.E = E;
  Eigen::MatrixXcd Einv = E.inverse();
  q.T = CArray3(n);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx s = 0.0;
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) s += Einv(c, k) * hp.T(k, i, jj) * E(i, a) * E(jj, b);
        q.T(c, a, b) = s;
      }
  q.tau = q.T;
  for (auto& z : q.tau.a) z *= 0.5;
  q.eta.assign(n, cplx(0.0));
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) q.eta[i] += hp.eta[a] * E(a, i);
  q.eta_s = q.eta;
  for (auto& z : q.eta_s) z *= -0.5;
  q.T2 = q.T.norm2();
  q.tau2 = q.tau.norm2();
  for (int i = 0; i < n; ++i) {
    q.eta2 += std::norm(q.eta[i]);
    q.eta_s2 += std::norm(q.eta_s[i]);
  }
  if (hp.order < 2) return q;
  q.Rh = CArray4(n);
  Eigen::MatrixXcd Ec = E.conjugate();
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cplx s = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) s += hp.Rh(a, b, c, d) * E(a, i) * Ec(b, jj) * E(c, k) * Ec(d, l);
          q.Rh(i, jj, k, l) = s;
        }
  Array4 R = riemann_from(hp.lc);
  Eigen::MatrixXcd V = real_components(E), Vc = V.conjugate();
  q.R_jl = complexify(R, V, Vc, V, Vc);
  q.R_kl = complexify(R, V, V, Vc, Vc);
  q.R_l = complexify(R, V, V, V, Vc);
  return q;
}
inline FrameQuantities frame_quantities(const HermitianPoint& hp) { return frame_quantities(hp, unitary_frame(hp.H)); }

inline CArray3 torsion(const HermitianStructure& hs, const std::vector<double>& p) {
  HermitianPoint hp = analyze(hs, p, 1);
  return frame_quantities(hp).T;
}

struct TorsionOneForms {
  std::vector<cplx> eta;  // unitary frame, eta_k = sum_i T^i_{ki}
  std::vector<cplx> eta_coord;
  std::vector<double> xi;  // real Lee form, xi = -(eta + etabar)/2
  double eta_norm2 = 0.0;
};

// eta + etabar on real axes: x_a -> 2 Re eta_a, y_a -> -2 Im eta_a
inline std::vector<double> lee_from_eta(const std::vector<cplx>& eta) {
  std::vector<double> xi(2 * eta.size());
  for (size_t a = 0; a < eta.size(); ++a) {
    xi[2 * a] = -eta[a].real();
    xi[2 * a + 1] = eta[a].imag();
  }
  return xi;
}

inline TorsionOneForms torsion_one_form(const HermitianPoint& hp) {
  TorsionOneForms t;
  FrameQuantities q = frame_quantities(hp);
  t.eta = q.eta;
  t.eta_coord = hp.eta;
  t.xi = lee_from_eta(hp.eta);
  t.eta_norm2 = q.eta2;
  return t;
}
inline TorsionOneForms torsion_one_form(const HermitianStructure& hs, const std::vector<double>& p) {
  return torsion_one_form(analyze(hs, p, 1));
}
inline std::vector<double> lee_form(const HermitianStructure& hs, const std::vector<double>& p) {
  return lee_from_eta(analyze(hs, p, 1).eta);
}

struct LeeFormJet {
  std::vector<double> xi;     // xi_mu
  std::vector<double> dxi;    // d_mu xi_nu at mu * m + nu
  Eigen::MatrixXd nabla;      // nabla_mu xi_nu (Levi-Civita)
  double norm = 0.0;          // |xi|_g
  double nabla_norm = 0.0;    // |nabla xi|_g, Frobenius
};

inline LeeFormJet lee_form_jet(const HermitianPoint& hp) {
  const int m = hp.m;
  LeeFormJet L;
  L.xi = lee_from_eta(hp.eta);
  L.dxi.resize(m * m);
  for (int mu = 0; mu < m; ++mu) {
    auto d = lee_from_eta(hp.deta[mu]);
    for (int nu = 0; nu < m; ++nu) L.dxi[mu * m + nu] = d[nu];
  }
  const auto& lc = hp.lc;
  L.nabla.resize(m, m);
  for (int mu = 0; mu < m; ++mu)
    for (int nu = 0; nu < m; ++nu) {
      double s = L.dxi[mu * m + nu];
      for (int r = 0; r < m; ++r) s -= lc.gamma(r, mu, nu) * L.xi[r];
      L.nabla(mu, nu) = s;
    }
  Eigen::Map<Eigen::VectorXd> x(L.xi.data(), m);
  L.norm = std::sqrt(std::max(0.0, x.dot(lc.ginv * x)));
  L.nabla_norm = std::sqrt(std::max(0.0, (lc.ginv * L.nabla * lc.ginv * L.nabla.transpose()).trace()));
  return L;
}

inline OneFormField lee_form_field(const HermitianStructure& hs) {
  return OneFormField(hs.real_dim(), [hs](const double* p, double* xi, double* dxi) {
    HermitianPoint hp = analyze(hs, std::vector<double>(p, p + hs.real_dim()), dxi ? 2 : 1);
    auto x = lee_from_eta(hp.eta);
    const int m = hp.m;
    for (int nu = 0; nu < m; ++nu) xi[nu] = x[nu];
    if (dxi)
      for (int mu = 0; mu < m; ++mu) {
        auto d = lee_from_eta(hp.deta[mu]);
        for (int nu = 0; nu < m; ++nu) dxi[mu * m + nu] = d[nu];
      }
  });
}

struct ChernCurvatureData {
  CArray4 Rh;    // unitary frame
  CArray4 R_jl;  // R_{i jbar k lbar}
  CArray4 R_kl;  // R_{i j kbar lbar}
  CArray4 R_l;   // R_{i j k lbar}
};
inline CArray4 chern_curvature(const HermitianStructure& hs, const std::vector<double>& p) {
  return frame_quantities(analyze(hs, p, 2)).Rh;
}
inline ChernCurvatureData riemann_complexified(const HermitianStructure& hs, const std::vector<double>& p) {
  FrameQuantities q = frame_quantities(analyze(hs, p, 2));
  return {q.Rh, q.R_jl, q.R_kl, q.R_l};
}

// max |R_{i jbar k lbar} - R_{k jbar i lbar} - R_{i k jbar lbar}|
inline double complexified_bianchi_defect(const FrameQuantities& q) {
  const int n = q.E.cols();
  double w = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) w = std::max(w, std::abs(q.R_jl(i, j, k, l) - q.R_jl(k, j, i, l) - q.R_kl(i, k, j, l)));
  return w;
}

struct StarNorms {
  double star = 0.0, star_star = 0.0;
  double sum_chern_minus_riem = 0.0;  // sum |R^h_{ijbarklbar} - R_{ijbarklbar}|^2
  double sum_20 = 0.0;                // sum |R_{ij kbar lbar}|^2
  double sum_31 = 0.0;                // sum |R_{ijk lbar}|^2
};

inline StarNorms star_norms(const FrameQuantities& q) {
  StarNorms s;
  for (size_t i = 0; i < q.Rh.a.size(); ++i) {
    s.sum_chern_minus_riem += std::norm(q.Rh.a[i] - q.R_jl.a[i]);
    s.sum_20 += std::norm(q.R_kl.a[i]);
    s.sum_31 += std::norm(q.R_l.a[i]);
  }
  s.star = std::sqrt(s.sum_chern_minus_riem + 2.0 * s.sum_20);
  s.star_star = std::sqrt(s.sum_31);
  return s;
}
inline StarNorms star_norms(const HermitianStructure& hs, const std::vector<double>& p) {
  return star_norms(frame_quantities(analyze(hs, p, 2)));
}

// Unitary frame with theta(p) = 0 to first order.
struct AdaptedFrame {
  std::vector<double> p;
  Eigen::MatrixXcd E0;
  std::vector<Eigen::MatrixXcd> theta;  // connection of the unitary frame at p

  // e~(x) = E(x) (I - Theta(x)), Theta(x) = sum_mu theta_mu (x^mu - p^mu)
  Eigen::MatrixXcd at(const HermitianStructure& hs, const std::vector<double>& x) const {
    const int n = static_cast<int>(E0.rows());
    Eigen::MatrixXcd Th = Eigen::MatrixXcd::Zero(n, n);
    for (size_t mu = 0; mu < theta.size(); ++mu) Th += theta[mu] * (x[mu] - p[mu]);
    return unitary_frame(hs.h(x)) * (Eigen::MatrixXcd::Identity(n, n) - Th);
  }
};

inline AdaptedFrame adapted_frame(const HermitianStructure& hs, const HermitianPoint& hp) {
  (void)hs;
  AdaptedFrame af;
  af.p = hp.p;
  af.E0 = unitary_frame(hp.H);
  af.theta = chern_connection(hp);
  return af;
}

// connection of the adapted frame at p, recomputed from a 4th-order FD
// derivative of e~ (independent of the analytic frame derivative)
inline double adapted_connection_defect(const HermitianStructure& hs, const HermitianPoint& hp, const AdaptedFrame& af,
                                        double h = 1e-3) {
  double worst = 0.0;
  Eigen::MatrixXcd Einv = af.E0.inverse();
  for (int mu = 0; mu < hp.m; ++mu) {
    auto shifted = [&](double s) {
      std::vector<double> x = hp.p;
      x[mu] += s * h;
      return af.at(hs, x);
    };
    Eigen::MatrixXcd dE = (shifted(-2) - 8.0 * shifted(-1) + 8.0 * shifted(1) - shifted(2)) / (12.0 * h);
    Eigen::MatrixXcd th = Einv * (dE + holomorphic_connection(hp, mu) * af.E0);
    worst = std::max(worst, th.cwiseAbs().maxCoeff());
  }
  return worst;
}

// tau^k_{ij,l} (d) and tau^k_{ij,lbar} (db) from FD of tau in the adapted frame
struct TorsionDerivatives {
  CArray4 d;   // (k,i,j,l)
  CArray4 db;  // (k,i,j,l)
  double norm_d() const { return std::sqrt(d.norm2()); }
  double norm_db() const { return std::sqrt(db.norm2()); }
};

inline CArray3 tau_in_frame(const HermitianStructure& hs, const std::vector<double>& x, const Eigen::MatrixXcd& E) {
  HermitianPoint hx = analyze(hs, x, 1);
  CArray3 t = frame_quantities(hx, E).tau;
  return t;
}

inline TorsionDerivatives adapted_torsion_derivatives(const HermitianStructure& hs, const AdaptedFrame& af,
                                                      double h_step, int fd_order = 2) {
  const int n = hs.nc(), m = 2 * n;
  std::vector<CArray3> dr(m, CArray3(n));
  for (int mu = 0; mu < m; ++mu) {
    auto tau_at = [&](double s) {
      std::vector<double> x = af.p;
      x[mu] += s * h_step;
      return tau_in_frame(hs, x, af.at(hs, x));
    };
    if (fd_order >= 4) {
      CArray3 a = tau_at(-2), b = tau_at(-1), c = tau_at(1), d = tau_at(2);
      for (size_t i = 0; i < a.a.size(); ++i) dr[mu].a[i] = (a.a[i] - 8.0 * b.a[i] + 8.0 * c.a[i] - d.a[i]) / (12.0 * h_step);
    } else {
      CArray3 b = tau_at(-1), c = tau_at(1);
      for (size_t i = 0; i < b.a.size(); ++i) dr[mu].a[i] = (c.a[i] - b.a[i]) / (2.0 * h_step);
    }
  }
  const cplx I(0.0, 1.0);
  TorsionDerivatives td{CArray4(n), CArray4(n)};
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          cplx s = 0.0, sb = 0.0;
          for (int a = 0; a < n; ++a) {
            cplx za = 0.5 * (dr[2 * a](k, i, j) - I * dr[2 * a + 1](k, i, j));
            cplx zb = 0.5 * (dr[2 * a](k, i, j) + I * dr[2 * a + 1](k, i, j));
            s += af.E0(a, l) * za;
            sb += std::conj(af.E0(a, l)) * zb;
          }
          td.d(k, i, j, l) = s;
          td.db(k, i, j, l) = sb;
        }
  return td;
}

struct Lemma7Residuals {
  double id1 = 0.0, id2 = 0.0, id3_printed = 0.0, id3 = 0.0, id4 = 0.0;
  double h_step = 0.0;
};

inline Lemma7Residuals lemma7_from(const FrameQuantities& q, const TorsionDerivatives& td) {
  const int n = q.tau.n;
  const auto& t = q.tau;
  auto c = [](cplx z) { return std::conj(z); };
  Lemma7Residuals r;
  double s1 = 0, s2 = 0, s3p = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cplx l1 = 2.0 * td.db(k, i, j, l);
          cplx r1 = q.Rh(j, l, i, k) - q.Rh(i, l, j, k);
          s1 += std::norm(l1 - r1);

          cplx r2 = q.R_l(i, j, k, l);
          for (int rr = 0; rr < n; ++rr) r2 += -t(l, rr, i) * t(rr, j, k) + t(l, rr, j) * t(rr, i, k);
          s2 += std::norm(td.d(l, i, j, k) - r2);

          cplx r3 = td.db(l, i, j, k) - td.db(k, i, j, l);
          for (int rr = 0; rr < n; ++rr)
            r3 += 2.0 * t(rr, i, j) * c(t(rr, k, l)) + t(k, rr, i) * c(t(j, rr, l)) + t(l, rr, j) * c(t(i, rr, k)) -
                  t(l, rr, i) * c(t(j, rr, k)) - t(k, rr, j) * c(t(i, rr, l));
          s3p += std::norm(2.0 * q.R_kl(i, j, k, l) - r3);
          s3 += std::norm(q.R_kl(i, j, k, l) - r3);

          cplx r4 = q.Rh(k, l, i, j) - td.db(j, i, k, l) - c(td.db(i, j, l, k));
          for (int rr = 0; rr < n; ++rr)
            r4 += t(rr, i, k) * c(t(rr, j, l)) - t(j, rr, k) * c(t(i, rr, l)) - t(l, rr, i) * c(t(k, rr, j));
          s4 += std::norm(q.R_jl(k, l, i, j) - r4);
        }
  r.id1 = std::sqrt(s1);
  r.id2 = std::sqrt(s2);
  r.id3_printed = std::sqrt(s3p);
  r.id3 = std::sqrt(s3);
  r.id4 = std::sqrt(s4);
  return r;
}

inline Lemma7Residuals lemma7_residuals(const HermitianStructure& hs, const std::vector<double>& p, double h_step) {
  HermitianPoint hp = analyze(hs, p, 2);
  AdaptedFrame af = adapted_frame(hs, hp);
  FrameQuantities q = frame_quantities(hp, af.E0);
  Lemma7Residuals r = lemma7_from(q, adapted_torsion_derivatives(hs, af, h_step, 2));
  r.h_step = h_step;
  return r;
}

struct TorsionCurvatureIdentity {
  double lhs_literal = 0.0;   // proof text, with "- R_{ij ibar jbar}"
  double lhs_bianchi = 0.0;   // same sum with the Bianchi-consistent "+"
  double lhs_pre = 0.0;       // form before the Bianchi rewrite
  double rhs = 0.0;           // |tau|^2 + 2 |eta_s|^2
  double rhs_coordinate = 0.0;  // |T|^2 + 2 |eta|^2 in the coordinate normalization
  double imag_max = 0.0;      // largest imaginary part among the lhs sums
  double residual_literal = 0.0;
  double residual = 0.0;      // |lhs_bianchi - rhs|
  double residual_pre = 0.0;
};

inline TorsionCurvatureIdentity torsion_curvature_identity(const FrameQuantities& q) {
  const int n = q.tau.n;
  cplx lit = 0.0, bia = 0.0, pre = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx base = 0.5 * (q.Rh(i, i, j, j) - q.R_jl(i, i, j, j)) + 0.5 * (q.Rh(j, j, i, i) - q.R_jl(j, j, i, i));
      lit += base - q.R_kl(i, j, i, j);
      bia += base + q.R_kl(i, j, i, j);
      pre += 0.5 * (q.Rh(i, i, j, j) + q.Rh(j, j, i, i)) - q.R_jl(i, j, j, i);
    }
  TorsionCurvatureIdentity t;
  t.lhs_literal = lit.real();
  t.lhs_bianchi = bia.real();
  t.lhs_pre = pre.real();
  t.imag_max = std::max({std::abs(lit.imag()), std::abs(bia.imag()), std::abs(pre.imag())});
  t.rhs = q.tau2 + 2.0 * q.eta_s2;
  t.rhs_coordinate = q.T2 + 2.0 * q.eta2;
  t.residual_literal = std::min(std::abs(lit - t.rhs), std::abs(lit - t.rhs_coordinate));
  t.residual = std::abs(bia - t.rhs);
  t.residual_pre = std::abs(pre - t.rhs);
  return t;
}
inline TorsionCurvatureIdentity torsion_curvature_identity(const HermitianStructure& hs, const std::vector<double>& p) {
  return torsion_curvature_identity(frame_quantities(analyze(hs, p, 2)));
}

struct Theorem2Report {
  double tau2 = 0.0, eta2 = 0.0;          // structure normalization
  double T2 = 0.0, eta_coord2 = 0.0;      // coordinate normalization
  double d_prime = 0.0, d_second = 0.0;   // |nabla^{c'} tau|, |nabla^{c''} tau|
  StarNorms star;
  double slack_tau = 0.0, slack_eta = 0.0;  // star - |tau|^2, star - |eta|^2
  // statement: |nabla' tau| <= star, |nabla'' tau| <= C star + star_star
  double slack_stmt_prime = 0.0, implied_C_stmt_second = 0.0;
  // lemmas: |nabla'' tau| <= star, |nabla' tau| <= C star + star_star
  double slack_lemma_second = 0.0, implied_C_lemma_prime = 0.0;
  bool violated = false;  // constant-free inequalities only
};

inline double implied_constant(double lhs, double star, double star_star) {
  if (lhs <= star_star) return 0.0;
  if (star <= 0.0) return std::numeric_limits<double>::infinity();
  return (lhs - star_star) / star;
}

inline Theorem2Report theorem2_checks(const HermitianStructure& hs, const std::vector<double>& p, double h_step = 1e-2) {
  HermitianPoint hp = analyze(hs, p, 2);
  AdaptedFrame af = adapted_frame(hs, hp);
  FrameQuantities q = frame_quantities(hp, af.E0);
  TorsionDerivatives td = adapted_torsion_derivatives(hs, af, h_step, 4);
  Theorem2Report r;
  r.tau2 = q.tau2;
  r.eta2 = q.eta_s2;
  r.T2 = q.T2;
  r.eta_coord2 = q.eta2;
  r.d_prime = td.norm_d();
  r.d_second = td.norm_db();
  r.star = star_norms(q);
  r.slack_tau = r.star.star - r.tau2;
  r.slack_eta = r.star.star - r.eta2;
  r.slack_stmt_prime = r.star.star - r.d_prime;
  r.implied_C_stmt_second = implied_constant(r.d_second, r.star.star, r.star.star_star);
  r.slack_lemma_second = r.star.star - r.d_second;
  r.implied_C_lemma_prime = implied_constant(r.d_prime, r.star.star, r.star.star_star);
  r.violated = r.slack_tau < -1e-8 || r.slack_eta < -1e-8;
  return r;
}

struct LCTorsionDerivative {
  double norm = 0.0;        // |nabla tau| for tau viewed as a real (1,2) tensor
  double norm_coord = 0.0;  // same for T = 2 tau
  StarNorms star;
  double implied_C = 0.0;
};

// real components tau^rho_{mu nu} of the torsion (1/2 normalization)
// from complex components: Z^c = sum c_mu^a c_nu^b tau^c_{ab},
// rho = x_c -> Re Z^c, rho = y_c -> Im Z^c, with c_{x_a} = 1, c_{y_a} = i on index a
inline std::vector<double> real_torsion(const CArray3& T, int n, double scale) {
  const int m = 2 * n;
  std::vector<double> out(static_cast<size_t>(m) * m * m, 0.0);
  const cplx I(0.0, 1.0);
  for (int mu = 0; mu < m; ++mu)
    for (int nu = 0; nu < m; ++nu) {
      int a = mu / 2, b = nu / 2;
      cplx ca = (mu % 2) ? I : cplx(1.0), cb = (nu % 2) ? I : cplx(1.0);
      for (int c = 0; c < n; ++c) {
        cplx z = scale * ca * cb * T(c, a, b);
        out[((2 * c) * m + mu) * m + nu] = z.real();
        out[((2 * c + 1) * m + mu) * m + nu] = z.imag();
      }
    }
  return out;
}

inline LCTorsionDerivative lc_torsion_derivative(const HermitianStructure& hs, const std::vector<double>& p) {
  HermitianPoint hp = analyze(hs, p, 2);
  const int n = hp.n, m = hp.m;
  std::vector<double> t = real_torsion(hp.T, n, 0.5);
  std::vector<std::vector<double>> dt(m);
  for (int l = 0; l < m; ++l) dt[l] = real_torsion(hp.dT[l], n, 0.5);
  const auto& G = hp.lc.gamma;
  auto at = [m](const std::vector<double>& v, int r, int a, int b) { return v[(r * m + a) * m + b]; };
  // nabla_l t^r_{ab}
  std::vector<double> nt(static_cast<size_t>(m) * m * m * m);
  for (int l = 0; l < m; ++l)
    for (int r = 0; r < m; ++r)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double s = at(dt[l], r, a, b);
          for (int q = 0; q < m; ++q)
            s += G(r, l, q) * at(t, q, a, b) - G(q, l, a) * at(t, r, q, b) - G(q, l, b) * at(t, r, a, q);
          nt[((l * m + r) * m + a) * m + b] = s;
        }
  const auto& g = hp.lc.g;
  const auto& gi = hp.lc.ginv;
  double acc = 0.0;
  auto NT = [&](int l, int r, int a, int b) { return nt[((l * m + r) * m + a) * m + b]; };
  // contract with g_{r r'} g^{l l'} g^{a a'} g^{b b'}, done by raising/lowering in stages
  std::vector<double> low(nt.size(), 0.0);
  for (int l = 0; l < m; ++l)
    for (int r = 0; r < m; ++r)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double s = 0.0;
          for (int l2 = 0; l2 < m; ++l2)
            for (int a2 = 0; a2 < m; ++a2)
              for (int b2 = 0; b2 < m; ++b2) s += gi(l, l2) * gi(a, a2) * gi(b, b2) * NT(l2, r, a2, b2);
          double s2 = 0.0;
          for (int r2 = 0; r2 < m; ++r2) s2 += g(r, r2) * NT(l, r2, a, b);
          low[((l * m + r) * m + a) * m + b] = s;
          acc += s * s2;
        }
  LCTorsionDerivative out;
  out.norm = std::sqrt(std::max(0.0, acc));
  out.norm_coord = 2.0 * out.norm;
  out.star = star_norms(frame_quantities(hp));
  out.implied_C = implied_constant(out.norm, out.star.star, out.star.star_star);
  return out;
}

}  // namespace driftlab
