#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "grid.hpp"
#include "hermitian.hpp"
#include "metric.hpp"

namespace driftlab {

enum class SymmetryClass { self_adjoint_weighted, non_self_adjoint };

inline const char* to_string(SymmetryClass s) {
  return s == SymmetryClass::self_adjoint_weighted ? "self-adjoint-weighted" : "non-self-adjoint";
}

// Second-order operator on a periodic grid
//   (L u) = (1/rho) d_mu (rho C^{mu nu} d_nu u) + b^mu d_mu u
// with flux-centered diagonal terms (coefficients at half nodes), centered
// mixed terms and centered drift. Constants are in the kernel by construction.
class DiscreteOperator {
 public:
  std::string name;
  Grid grid;
  SymmetryClass symmetry = SymmetryClass::non_self_adjoint;
  Eigen::VectorXd weight;  // rho x cell volume
  std::vector<std::string> flags;
  std::map<std::string, double> info;

  DiscreteOperator() = default;
  DiscreteOperator(std::string nm, Grid g) : name(std::move(nm)), grid(std::move(g)) {
    const size_t N = grid.size();
    const int d = grid.dim();
    nb_.resize(N * 2 * d);
    for (size_t i = 0; i < N; ++i)
      for (int a = 0; a < d; ++a) {
        nb_[(i * d + a) * 2] = grid.shift(i, a, -1);
        nb_[(i * d + a) * 2 + 1] = grid.shift(i, a, 1);
      }
    rho_.assign(N, 1.0);
    half_.assign(static_cast<size_t>(d) * N, 0.0);
    off_.assign(static_cast<size_t>(d) * d * N, 0.0);
    drift_.assign(static_cast<size_t>(d) * N, 0.0);
  }

  size_t size() const { return grid.size(); }
  int dim() const { return grid.dim(); }

  // setup accessors
  double& rho(size_t i) { return rho_[i]; }
  double& half(int a, size_t i) { return half_[a * size() + i]; }  // rho C^{aa} at i + e_a / 2
  double& off(int a, int b, size_t i) { return off_[(a * dim() + b) * size() + i]; }  // rho C^{ab} at i
  double& drift(int a, size_t i) { return drift_[a * size() + i]; }
  void finalize() {
    has_off_ = false;
    for (double v : off_)
      if (v != 0.0) { has_off_ = true; break; }
    has_drift_ = false;
    for (double v : drift_)
      if (v != 0.0) { has_drift_ = true; break; }
    const size_t N = size();
    weight.resize(N);
    for (size_t i = 0; i < N; ++i) weight[i] = rho_[i] * grid.cell_volume();
  }
  bool has_drift() const { return has_drift_; }

  size_t neighbor(size_t i, int axis, int s) const { return nb_[(i * dim() + axis) * 2 + (s > 0 ? 1 : 0)]; }

  void apply(const double* u, double* out) const {
    const size_t N = size();
    const int d = dim();
    for (size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a) {
        const double ha = grid.h(a);
        size_t ip = neighbor(i, a, 1), im = neighbor(i, a, -1);
        acc += (half_[a * N + i] * (u[ip] - u[i]) - half_[a * N + im] * (u[i] - u[im])) / (ha * ha);
        if (has_off_)
          for (int b = 0; b < d; ++b) {
            if (b == a) continue;
            const double cp = off_[(a * d + b) * N + ip], cm = off_[(a * d + b) * N + im];
            if (cp == 0.0 && cm == 0.0) continue;
            acc += (cp * (u[neighbor(ip, b, 1)] - u[neighbor(ip, b, -1)]) - cm * (u[neighbor(im, b, 1)] - u[neighbor(im, b, -1)])) /
                   (4.0 * ha * grid.h(b));
          }
      }
      double val = acc / rho_[i];
      if (has_drift_)
        for (int a = 0; a < d; ++a)
          val += drift_[a * N + i] * (u[neighbor(i, a, 1)] - u[neighbor(i, a, -1)]) / (2.0 * grid.h(a));
      out[i] = val;
    }
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(size());
    apply(u.data(), out.data());
    return out;
  }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const {
    Eigen::VectorXd re = u.real(), im = u.imag();
    Eigen::VectorXd a = apply(re), b = apply(im);
    Eigen::VectorXcd out(size());
    out.real() = a;
    out.imag() = b;
    return out;
  }

  Eigen::VectorXd diagonal() const {
    const size_t N = size();
    Eigen::VectorXd D(N);
    for (size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (int a = 0; a < dim(); ++a) {
        double ha = grid.h(a);
        s -= (half_[a * N + i] + half_[a * N + neighbor(i, a, -1)]) / (ha * ha);
      }
      D[i] = s / rho_[i];
    }
    return D;
  }

  Eigen::MatrixXd materialize() const {
    const size_t N = size();
    Eigen::MatrixXd M(N, N);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    for (size_t j = 0; j < N; ++j) {
      e[j] = 1.0;
      M.col(j) = apply(e);
      e[j] = 0.0;
    }
    return M;
  }

  // max |L 1|
  double constant_defect() const { Eigen::VectorXd one = Eigen::VectorXd::Ones(size());
    return apply(one).norm(); }

  double weighted_symmetry_defect(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd Lu = apply(u), Lv = apply(v);
    double a = (weight.array() * Lu.array() * v.array()).sum();
    double b = (weight.array() * u.array() * Lv.array()).sum();
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
  }

 private:
  std::vector<size_t> nb_;
  std::vector<double> rho_, half_, off_, drift_;
  bool has_off_ = false, has_drift_ = false;
};

namespace detail {
// fill coefficients from a callback coef(x, rho, C) (C row-major dim x dim)
template <class Coef>
void fill_coefficients(DiscreteOperator& op, Coef&& coef, double c_scale = 1.0) {
  const Grid& g = op.grid;
  const int d = g.dim();
  const size_t N = g.size();
  std::vector<double> C(d * d);
  for (size_t i = 0; i < N; ++i) {
    std::vector<double> x = g.coords(i);
    double rho;
    coef(x, rho, C.data());
    op.rho(i) = rho;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (a != b) op.off(a, b, i) = c_scale * rho * C[a * d + b];
    for (int a = 0; a < d; ++a) {
      std::vector<double> xm = x;
      xm[a] += 0.5 * g.h(a);
      double rm;
      coef(xm, rm, C.data());
      op.half(a, i) = c_scale * rm * C[a * d + a];
    }
  }
}
inline void metric_coefficients(const ChartedMetric& m, const std::vector<double>& x, double& rho, double* C) {
  Eigen::MatrixXd g = m.g(x);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetricError("metric not positive definite on the grid");
  Eigen::MatrixXd gi = llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
  rho = std::sqrt(g.determinant());
  for (int a = 0; a < g.rows(); ++a)
    for (int b = 0; b < g.cols(); ++b) C[a * g.cols() + b] = gi(a, b);
}
}  // namespace detail

// Delta_g + xi(grad): divergence-form Laplace-Beltrami plus centered drift xi^mu = g^{mu nu} xi_nu
inline DiscreteOperator discretize_drift_laplacian(const ChartedMetric& m, const OneFormField& xi, const Grid& grid) {
  if (grid.chart().dim() != m.dim() || xi.dim() != m.dim()) throw DimensionError("grid, metric and one-form dimensions differ");
  DiscreteOperator op("drift_laplacian", grid);
  detail::fill_coefficients(op, [&](const std::vector<double>& x, double& rho, double* C) { detail::metric_coefficients(m, x, rho, C); });
  const int d = m.dim();
  std::vector<double> v(d);
  for (size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> x = grid.coords(i);
    xi.sample(x.data(), v.data());
    Eigen::Map<Eigen::VectorXd> xv(v.data(), d);
    Eigen::VectorXd up = checked_inverse(m.g(x)) * xv;
    for (int a = 0; a < d; ++a) op.drift(a, i) = up[a];
  }
  op.finalize();
  op.symmetry = op.has_drift() ? SymmetryClass::non_self_adjoint : SymmetryClass::self_adjoint_weighted;
  return op;
}

inline DiscreteOperator discretize_laplacian(const ChartedMetric& m, const Grid& grid) {
  return discretize_drift_laplacian(m, OneFormField::zero(m.dim()), grid);
}

// d log w = tau + taubar, tau_c = h^{a dbar} d_a h_{c dbar}; with this weight
// -(1/w) d_a (w h^{a bbar} d_bbar u) is exactly minus the complex Laplacian.
struct ComplexWeight {
  std::vector<double> log_w;  // at nodes, log w(0) = 0
  std::vector<double> beta;   // real one-form tau + taubar at nodes, [i * dim + a]
  double period_defect = 0.0;
  double curl_defect = 0.0;
  bool exact = true;
};

inline std::vector<double> complex_weight_form(const HermitianPoint& hp, std::vector<double>* curl = nullptr) {
  const int n = hp.n, m = hp.m;
  std::vector<double> beta(m);
  auto tau = [&](const CArray3& G, int c) {
    cplx s = 0.0;
    for (int a = 0; a < n; ++a) s += G(a, a, c);
    return s;
  };
  for (int c = 0; c < n; ++c) {
    cplx t = tau(hp.gamma, c);
    beta[2 * c] = 2.0 * t.real();
    beta[2 * c + 1] = -2.0 * t.imag();
  }
  if (curl && !hp.dgamma.empty()) {
    curl->assign(m * m, 0.0);
    std::vector<double> db(m * m);
    for (int mu = 0; mu < m; ++mu)
      for (int c = 0; c < n; ++c) {
        cplx t = tau(hp.dgamma[mu], c);
        db[mu * m + 2 * c] = 2.0 * t.real();
        db[mu * m + 2 * c + 1] = -2.0 * t.imag();
      }
    for (int mu = 0; mu < m; ++mu)
      for (int nu = 0; nu < m; ++nu) (*curl)[mu * m + nu] = db[mu * m + nu] - db[nu * m + mu];
  }
  return beta;
}

inline ComplexWeight complex_weight(const HermitianStructure& hs, const Grid& grid) {
  const int d = grid.dim();
  const size_t N = grid.size();
  ComplexWeight w;
  w.beta.resize(N * d);
  w.log_w.assign(N, 0.0);
  double beta_scale = 0.0;
  std::vector<double> curl;
  for (size_t i = 0; i < N; ++i) {
    HermitianPoint hp = analyze(hs, grid.coords(i), 2);
    auto b = complex_weight_form(hp, &curl);
    for (int a = 0; a < d; ++a) {
      w.beta[i * d + a] = b[a];
      beta_scale = std::max(beta_scale, std::abs(b[a]));
    }
    for (double c : curl) w.curl_defect = std::max(w.curl_defect, std::abs(c));
  }
  auto beta_mid = [&](size_t i, int a) {
    std::vector<double> x = grid.coords(i);
    x[a] += 0.5 * grid.h(a);
    return complex_weight_form(analyze(hs, x, 1))[a];
  };
  // path integration: axis 0 first, then axis 1, ... (Simpson on each cell)
  std::vector<int> mi(d);
  for (int a = 0; a < d; ++a) {
    std::vector<size_t> order;
    for (size_t i = 0; i < N; ++i) {
      grid.multi_index(i, mi.data());
      bool ok = mi[a] > 0;
      for (int b = a + 1; b < d; ++b) ok = ok && mi[b] == 0;
      if (ok) order.push_back(i);
    }
    for (size_t i : order) {
      size_t prev = grid.shift(i, a, -1);
      double s = grid.h(a) / 6.0 * (w.beta[prev * d + a] + 4.0 * beta_mid(prev, a) + w.beta[i * d + a]);
      w.log_w[i] = w.log_w[prev] + s;
    }
    // loop integral along axis a through the origin
    double loop = 0.0;
    size_t i = 0;
    for (int k = 0; k < grid.n(a); ++k) {
      size_t nx = grid.shift(i, a, 1);
      loop += grid.h(a) / 6.0 * (w.beta[i * d + a] + 4.0 * beta_mid(i, a) + w.beta[nx * d + a]);
      i = nx;
    }
    w.period_defect = std::max(w.period_defect, std::abs(loop));
  }
  double L = 0.0;
  for (int a = 0; a < d; ++a) L = std::max(L, grid.chart().period(a));
  w.exact = w.period_defect <= 1e-8 * (1.0 + beta_scale * L) && w.curl_defect <= 1e-8 * (1.0 + beta_scale);
  return w;
}

inline DiscreteOperator complex_laplacian_weak_form(const HermitianStructure& hs, const Grid& grid) {
  ChartedMetric m = hs.induced_metric();
  ComplexWeight w = complex_weight(hs, grid);
  const int d = grid.dim();
  DiscreteOperator op("complex_laplacian_weak", grid);
  const size_t N = grid.size();
  std::vector<double> C(d * d);
  for (size_t i = 0; i < N; ++i) {
    std::vector<double> x = grid.coords(i);
    double r;
    detail::metric_coefficients(m, x, r, C.data());
    double rho = std::exp(w.log_w[i]);
    op.rho(i) = rho;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (a != b) op.off(a, b, i) = 0.5 * rho * C[a * d + b];
    for (int a = 0; a < d; ++a) {
      size_t ip = grid.shift(i, a, 1);
      double lw = 0.5 * (w.log_w[i] + w.log_w[ip]) + grid.h(a) / 8.0 * (w.beta[i * d + a] - w.beta[ip * d + a]);
      // log w is not periodic when the weight form is not exact; the wrap edge then uses the local value
      if (!w.exact && ip < i) lw = w.log_w[i] + 0.5 * grid.h(a) * w.beta[i * d + a];
      std::vector<double> xm = x;
      xm[a] += 0.5 * grid.h(a);
      detail::metric_coefficients(m, xm, r, C.data());
      op.half(a, i) = 0.5 * std::exp(lw) * C[a * d + a];
    }
  }
  op.finalize();
  op.info["period_defect"] = w.period_defect;
  op.info["curl_defect"] = w.curl_defect;
  if (w.exact) op.symmetry = SymmetryClass::self_adjoint_weighted;
  else {
    op.symmetry = SymmetryClass::non_self_adjoint;
    op.flags.push_back("weight form tau + taubar not exact: weak form is not the complex Laplacian");
  }
  return op;
}

// h^{i jbar} sqrt(det g) weights: this is 1/2 Delta, not the complex Laplacian
// unless the metric is balanced
inline DiscreteOperator complex_laplacian_weak_form_literal(const HermitianStructure& hs, const Grid& grid) {
  ChartedMetric m = hs.induced_metric();
  DiscreteOperator op("complex_laplacian_weak_literal", grid);
  detail::fill_coefficients(op, [&](const std::vector<double>& x, double& rho, double* C) { detail::metric_coefficients(m, x, rho, C); }, 0.5);
  op.finalize();
  op.symmetry = SymmetryClass::self_adjoint_weighted;
  return op;
}

// 1/2 Delta + c (eta + etabar)(grad); c = -1/2 gives 1/2 Delta + xi(grad)
inline DiscreteOperator complex_laplacian_drift_form(const HermitianStructure& hs, const Grid& grid, double c = -0.5) {
  ChartedMetric m = hs.induced_metric();
  DiscreteOperator op("complex_laplacian_drift", grid);
  detail::fill_coefficients(op, [&](const std::vector<double>& x, double& rho, double* C) { detail::metric_coefficients(m, x, rho, C); }, 0.5);
  const int d = grid.dim();
  for (size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> x = grid.coords(i);
    HermitianPoint hp = analyze(hs, x, 1);
    // eta + etabar = -2 xi as a real one-form
    std::vector<double> xi = lee_from_eta(hp.eta);
    Eigen::VectorXd zeta(d);
    for (int a = 0; a < d; ++a) zeta[a] = -2.0 * xi[a];
    Eigen::VectorXd up = hp.lc.ginv * (c * zeta);
    for (int a = 0; a < d; ++a) op.drift(a, i) = up[a];
  }
  op.finalize();
  op.symmetry = op.has_drift() ? SymmetryClass::non_self_adjoint : SymmetryClass::self_adjoint_weighted;
  op.info["factor"] = c;
  return op;
}

// smooth seeded test vectors: sums of products of low-order trig polynomials per axis
inline std::vector<Eigen::VectorXd> smooth_test_vectors(const Grid& grid, int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int d = grid.dim();
  const size_t N = grid.size();
  std::vector<Eigen::VectorXd> out;
  std::vector<int> mi(d);
  for (int t = 0; t < count; ++t) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
    for (int term = 0; term < 2; ++term) {
      std::vector<std::vector<double>> coef(d, std::vector<double>(5));
      for (auto& c : coef)
        for (auto& v : c) v = nd(rng);
      for (size_t i = 0; i < N; ++i) {
        grid.multi_index(i, mi.data());
        double p = 1.0;
        for (int a = 0; a < d; ++a) {
          double x = 2.0 * M_PI * mi[a] / grid.n(a);
          const auto& c = coef[a];
          p *= c[0] + c[1] * std::cos(x) + c[2] * std::sin(x) + 0.5 * c[3] * std::cos(2 * x) + 0.5 * c[4] * std::sin(2 * x);
        }
        u[i] += p;
      }
    }
    out.push_back(u);
  }
  return out;
}

inline double operator_residual(const DiscreteOperator& a, const DiscreteOperator& b, const std::vector<Eigen::VectorXd>& us) {
  double r = 0.0;
  for (const auto& u : us) r = std::max(r, (a.apply(u) - b.apply(u)).norm() / u.norm());
  return r;
}

struct FactorSelection {
  std::vector<double> candidates;
  std::vector<double> residuals;
  double selected = 0.0;
  double residual = 0.0;
  double literal_residual = 0.0;  // sqrt(det g) weighted weak form against the selected drift form
  bool determined = false;
};

inline FactorSelection select_drift_factor(const HermitianStructure& hs, const Grid& grid, uint64_t seed = 7, int vectors = 20) {
  FactorSelection s;
  s.candidates = {-0.5, 0.5, -2.0, 2.0};
  DiscreteOperator weak = complex_laplacian_weak_form(hs, grid);
  auto us = smooth_test_vectors(grid, vectors, seed);
  for (double c : s.candidates) s.residuals.push_back(operator_residual(weak, complex_laplacian_drift_form(hs, grid, c), us));
  size_t best = 0;
  for (size_t i = 1; i < s.residuals.size(); ++i)
    if (s.residuals[i] < s.residuals[best]) best = i;
  double second = INFINITY;
  for (size_t i = 0; i < s.residuals.size(); ++i)
    if (i != best) second = std::min(second, s.residuals[i]);
  s.selected = s.candidates[best];
  s.residual = s.residuals[best];
  s.determined = s.residual < 0.5 * second;
  s.literal_residual = operator_residual(complex_laplacian_weak_form_literal(hs, grid),
                                         complex_laplacian_drift_form(hs, grid, s.selected), us);
  return s;
}

}  // namespace driftlab
