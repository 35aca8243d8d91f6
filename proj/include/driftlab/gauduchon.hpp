#pragma once

#include <limits>
#include <optional>

#include "forms.hpp"

namespace driftlab {

// 2-form inner product <a,b> = 1/2 a_{ij} b^{ij}; W acts by W(a)_{ij} = 1/2 W_{ijlk} a^{kl}
inline Eigen::MatrixXd raise2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ginv) { return ginv * a * ginv; }
inline double form2_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& ginv) {
  return 0.5 * (a.cwiseProduct(raise2(b, ginv))).sum();
}
inline Eigen::MatrixXd apply_curvature(const Array4& W, const Eigen::MatrixXd& a, const Eigen::MatrixXd& ginv) {
  const int m = W.n;
  Eigen::MatrixXd up = raise2(a, ginv), out = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) s += W(i, j, l, k) * up(k, l);
      out(i, j) = 0.5 * s;
    }
  return out;
}

// full contraction T_{ijkl} T^{ijkl}
inline double full_norm2(const Array4& R, const Eigen::MatrixXd& ginv) {
  const int m = R.n;
  Array4 up(m);
  // raise one index at a time
  Array4 cur = R;
  for (int slot = 0; slot < 4; ++slot) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            int idx[4] = {i, j, k, l};
            double s = 0.0;
            for (int r = 0; r < m; ++r) {
              int jdx[4] = {i, j, k, l};
              jdx[slot] = r;
              s += ginv(idx[slot], r) * cur(jdx[0], jdx[1], jdx[2], jdx[3]);
            }
            up(i, j, k, l) = s;
          }
    cur = up;
  }
  double acc = 0.0;
  for (size_t i = 0; i < R.a.size(); ++i) acc += R.a[i] * cur.a[i];
  return acc;
}

struct GauduchonQuantities {
  double G = 0.0, S = 0.0, W_omega_omega = 0.0;
  double omega_norm2 = 0.0;  // equals n_c
  double W_norm = 0.0;       // Frobenius norm on 2-forms, 1/2 sqrt(W_{ijkl} W^{ijkl})
  double riem_norm = 0.0;    // sqrt(R_{ijkl} R^{ijkl})
};

inline GauduchonQuantities gauduchon_quantities(const HermitianPoint& hp) {
  if (hp.m < 4) throw DimensionError("gauduchon_quantities needs real dim >= 4");
  const int n = hp.n;
  Array4 R = riemann_from(hp.lc);
  Eigen::MatrixXd ric = ricci_from(R, hp.lc.ginv);
  double S = (hp.lc.ginv.cwiseProduct(ric)).sum();
  Array4 W = weyl_from(R, hp.lc.g, ric, S);
  Eigen::MatrixXd w = kahler_form_real(hp.H);
  GauduchonQuantities q;
  q.S = S;
  q.omega_norm2 = form2_inner(w, w, hp.lc.ginv);
  q.W_omega_omega = form2_inner(apply_curvature(W, w, hp.lc.ginv), w, hp.lc.ginv);
  q.G = (2.0 * n - 2.0) / (2.0 * n - 1.0) * S - q.W_omega_omega;
  q.W_norm = 0.5 * std::sqrt(std::max(0.0, full_norm2(W, hp.lc.ginv)));
  q.riem_norm = std::sqrt(std::max(0.0, full_norm2(R, hp.lc.ginv)));
  return q;
}
inline GauduchonQuantities gauduchon_quantities(const HermitianStructure& hs, const std::vector<double>& p) {
  return gauduchon_quantities(analyze(hs, p, 2));
}

struct KGauduchonCoefficients {
  int n = 0, k = 0;
  int eta_coef = 0;     // 2k - n
  int torsion_coef = 0; // n - k - 1
  bool admissible = false;  // k > n/2
  bool eta_positive = false, torsion_positive = false;
};
inline KGauduchonCoefficients k_gauduchon_coefficients(int n, int k) {
  KGauduchonCoefficients c;
  c.n = n;
  c.k = k;
  c.eta_coef = 2 * k - n;
  c.torsion_coef = n - k - 1;
  c.admissible = 2 * k > n && k <= n - 1;
  c.eta_positive = c.eta_coef > 0;
  c.torsion_positive = c.torsion_coef > 0;
  return c;
}

struct KGauduchonBound {
  int n = 0, k = 0;
  double G = 0.0;
  KGauduchonCoefficients coef;
  std::optional<double> eta2_bound;  // |eta|^2 <= (n-2) G / (2k-n)
  std::optional<double> T2_bound;    // |T|^2 <= (n-2) G / (n-k-1)
  std::vector<std::string> flags;
};

inline KGauduchonBound k_gauduchon_bound_values(double G, int n, int k) {
  KGauduchonBound b;
  b.n = n;
  b.k = k;
  b.G = G;
  b.coef = k_gauduchon_coefficients(n, k);
  if (!b.coef.admissible) throw PreconditionError("k-Gauduchon bound needs n/2 < k <= n-1");
  b.eta2_bound = (n - 2) * G / b.coef.eta_coef;
  if (b.coef.torsion_coef > 0) b.T2_bound = (n - 2) * G / b.coef.torsion_coef;
  else b.flags.push_back("torsion coefficient n-k-1 = 0: bound skipped");
  return b;
}

inline KGauduchonBound k_gauduchon_bound(const HermitianStructure& hs, const std::vector<double>& p, int k, double h = 1e-3,
                                         double tol = 1e-6) {
  const int n = hs.nc();
  AlphaK a = alpha_k(hs, p, k, h);
  if (std::abs(a.direct) > tol) throw PreconditionError("metric is not k-Gauduchon at this point (alpha_k above tolerance)");
  return k_gauduchon_bound_values(gauduchon_quantities(hs, p).G, n, k);
}

struct GauduchonL2 {
  int n = 0;
  double eta_l2 = 0.0;          // int |eta_s|^2 dV
  double eta_l2_coordinate = 0.0;  // int |eta|^2 dV, coordinate normalization
  double riem_rhs = 0.0;        // (n^2/4) int |Riem| dV
  double riem_rhs_l2 = 0.0;     // (n^2/4) (int |Riem|^2 dV)^{1/2}
  double refined_rhs = 0.0;     // int 1/4 ((2n-2)/(2n-1) S + 2 |W|) dV
  double slack = 0.0, slack_refined = 0.0;
  double sum_R = 0.0;           // int sum_ij R_{ij ibar jbar} dV
  double identity_residual = 0.0;    // |int (sum R - |eta|^2)|, smaller of the two normalizations
  double identity_residual_coordinate = 0.0;
  double identity_residual_structure = 0.0;
  double corrected_residual = 0.0;   // |int (sum R + 2 |eta_s|^2)|
  double theta_consistency = 0.0;    // max | |theta|^2 - 4 |eta + etabar|^2 |
  double volume = 0.0;
};

inline GauduchonL2 gauduchon_l2_estimate(const HermitianStructure& hs, const Grid& grid) {
  const int n = hs.nc();
  GauduchonL2 r;
  r.n = n;
  CompensatedSum e, ec, rm, rm2, ref, sr, vol;
  double dv0 = grid.cell_volume();
  grid.for_each_reduced(hs.invariant_axes(), [&](size_t, const std::vector<double>& x, double mult) {
    HermitianPoint hp = analyze(hs, x, 2);
    FrameQuantities q = frame_quantities(hp);
    GauduchonQuantities gq = gauduchon_quantities(hp);
    double w = mult * dv0 * std::sqrt(hp.lc.g.determinant());
    e.add(w * q.eta_s2);
    ec.add(w * q.eta2);
    rm.add(w * gq.riem_norm);
    rm2.add(w * gq.riem_norm * gq.riem_norm);
    ref.add(w * 0.25 * ((2.0 * n - 2.0) / (2.0 * n - 1.0) * gq.S + 2.0 * gq.W_norm));
    cplx s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += q.R_kl(i, j, i, j);
    sr.add(w * s.real());
    vol.add(w);
    // theta = -2 (eta + etabar) = 4 xi as real forms
    auto xi = lee_from_eta(hp.eta);
    Eigen::Map<Eigen::VectorXd> X(xi.data(), hp.m);
    double xi2 = X.dot(hp.lc.ginv * X);
    double theta2 = 16.0 * xi2, sum2 = 4.0 * xi2;  // |eta + etabar|^2 = |-2 xi|^2
    r.theta_consistency = std::max(r.theta_consistency, std::abs(theta2 - 4.0 * sum2));
  });
  const double c = n * n / 4.0;
  r.eta_l2 = e.value();
  r.eta_l2_coordinate = ec.value();
  r.riem_rhs = c * rm.value();
  r.riem_rhs_l2 = c * std::sqrt(std::max(0.0, rm2.value()));
  r.refined_rhs = ref.value();
  r.slack = r.riem_rhs - r.eta_l2;
  r.slack_refined = r.refined_rhs - r.eta_l2;
  r.sum_R = sr.value();
  r.identity_residual_structure = std::abs(r.sum_R - r.eta_l2);
  r.identity_residual_coordinate = std::abs(r.sum_R - r.eta_l2_coordinate);
  r.identity_residual = std::min(r.identity_residual_structure, r.identity_residual_coordinate);
  r.corrected_residual = std::abs(r.sum_R + 2.0 * r.eta_l2);
  r.volume = vol.value();
  return r;
}

}  // namespace driftlab
