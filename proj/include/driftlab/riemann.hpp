#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <vector>

#include "grid.hpp"
#include "metric.hpp"

namespace driftlab {

struct Array3 {
  int n = 0;
  std::vector<double> a;
  Array3() = default;
  explicit Array3(int n_) : n(n_), a(static_cast<size_t>(n_) * n_ * n_, 0.0) {}
  double& operator()(int i, int j, int k) { return a[(i * n + j) * n + k]; }
  double operator()(int i, int j, int k) const { return a[(i * n + j) * n + k]; }
};

struct Array4 {
  int n = 0;
  std::vector<double> a;
  Array4() = default;
  explicit Array4(int n_) : n(n_), a(static_cast<size_t>(n_) * n_ * n_ * n_, 0.0) {}
  double& operator()(int i, int j, int k, int l) { return a[((i * n + j) * n + k) * n + l]; }
  double operator()(int i, int j, int k, int l) const { return a[((i * n + j) * n + k) * n + l]; }
  double max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }
};

// Levi-Civita data from a metric jet; gamma(k,i,j) = Gamma^k_{ij},
// dgamma[m](k,i,j) = d_m Gamma^k_{ij}
struct LeviCivita {
  int n = 0;
  Eigen::MatrixXd g, ginv;
  std::vector<Eigen::MatrixXd> dg;
  Array3 gamma;
  std::vector<Array3> dgamma;
};

inline Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetricError("metric not positive definite");
  Eigen::VectorXd dg = llt.matrixL().toDenseMatrix().diagonal();
  if (dg.minCoeff() <= 1e-14 * std::max(1.0, dg.maxCoeff())) throw SingularMetricError("metric numerically singular");
  return llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

inline LeviCivita levi_civita(const Jet& j) {
  const int n = j.m;
  if (j.nc != n * n) throw DimensionError("metric jet has wrong component count");
  LeviCivita lc;
  lc.n = n;
  lc.g.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) lc.g(a, b) = j.val(a * n + b);
  lc.ginv = checked_inverse(lc.g);
  lc.gamma = Array3(n);
  if (j.order < 1) return lc;
  lc.dg.assign(n, Eigen::MatrixXd(n, n));
  for (int m = 0; m < n; ++m)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) lc.dg[m](a, b) = j.d(m, a * n + b);
  auto dgd = [&](int m, int a, int b) { return j.d(m, a * n + b); };
  // first-kind symbols G_{ijl} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  Array3 first(n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int l = 0; l < n; ++l) first(i, jj, l) = 0.5 * (dgd(i, jj, l) + dgd(jj, i, l) - dgd(l, i, jj));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += lc.ginv(k, l) * first(i, jj, l);
        lc.gamma(k, i, jj) = s;
      }
  if (j.order < 2) return lc;
  lc.dgamma.assign(n, Array3(n));
  for (int m = 0; m < n; ++m) {
    Eigen::MatrixXd dginv = -lc.ginv * lc.dg[m] * lc.ginv;
    Array3 dfirst(n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj)
        for (int l = 0; l < n; ++l)
          dfirst(i, jj, l) = 0.5 * (j.dd(m, i, jj * n + l) + j.dd(m, jj, i * n + l) - j.dd(m, l, i * n + jj));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += dginv(k, l) * first(i, jj, l) + lc.ginv(k, l) * dfirst(i, jj, l);
          lc.dgamma[m](k, i, jj) = s;
        }
  }
  return lc;
}

// R_{ijkl} = <R(d_i, d_j) d_k, d_l>, R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y];
// sectional curvature K(X,Y) = R(X,Y,Y,X) / |X^Y|^2
inline Array4 riemann_from(const LeviCivita& lc) {
  const int n = lc.n;
  if (lc.dgamma.empty()) throw PreconditionError("riemann needs a second-order metric jet");
  Array4 up(n);  // up(l, r, m, nn) = R^l_{r m nn}
  for (int l = 0; l < n; ++l)
    for (int r = 0; r < n; ++r)
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn) {
          double s = lc.dgamma[m](l, nn, r) - lc.dgamma[nn](l, m, r);
          for (int k = 0; k < n; ++k) s += lc.gamma(l, m, k) * lc.gamma(k, nn, r) - lc.gamma(l, nn, k) * lc.gamma(k, m, r);
          up(l, r, m, nn) = s;
        }
  Array4 R(n);
  for (int m = 0; m < n; ++m)
    for (int nn = 0; nn < n; ++nn)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) acc += lc.g(l, s) * up(l, r, m, nn);
          R(m, nn, r, s) = acc;
        }
  return R;
}

inline Eigen::MatrixXd ricci_from(const Array4& R, const Eigen::MatrixXd& ginv) {
  const int n = R.n;
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) s += ginv(i, l) * R(i, j, k, l);
      ric(j, k) = s;
    }
  return ric;
}

// (A (.) B)_{ijkl} = A_il B_jk + A_jk B_il - A_ik B_jl - A_jl B_ik
inline Array4 kulkarni_nomizu(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  Array4 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          out(i, j, k, l) = A(i, l) * B(j, k) + A(j, k) * B(i, l) - A(i, k) * B(j, l) - A(j, l) * B(i, k);
  return out;
}

inline Array4 weyl_from(const Array4& R, const Eigen::MatrixXd& g, const Eigen::MatrixXd& ric, double S) {
  const int n = R.n;
  Array4 W(n);
  if (n < 4) return W;
  Eigen::MatrixXd P = (ric - S / (2.0 * (n - 1)) * g) / (n - 2.0);
  Array4 Pg = kulkarni_nomizu(P, g);
  for (size_t i = 0; i < W.a.size(); ++i) W.a[i] = R.a[i] - Pg.a[i];
  return W;
}

struct CurvatureBundle {
  std::vector<double> point;
  int n = 0;
  Eigen::MatrixXd g, ginv;
  Array3 gamma;
  Array4 riem;
  Eigen::MatrixXd ric;
  double scalar = 0.0;
  Array4 weyl;
};

inline CurvatureBundle curvature_from_jet(const Jet& j, std::vector<double> p = {}) {
  LeviCivita lc = levi_civita(j);
  CurvatureBundle cb;
  cb.point = std::move(p);
  cb.n = lc.n;
  cb.g = lc.g;
  cb.ginv = lc.ginv;
  cb.gamma = lc.gamma;
  cb.riem = riemann_from(lc);
  cb.ric = ricci_from(cb.riem, cb.ginv);
  cb.scalar = (cb.ginv.cwiseProduct(cb.ric)).sum();
  cb.weyl = weyl_from(cb.riem, cb.g, cb.ric, cb.scalar);
  return cb;
}

inline CurvatureBundle curvature(const ChartedMetric& m, const std::vector<double>& p) {
  return curvature_from_jet(m.jet(p.data(), 2), p);
}
inline Array3 christoffel(const ChartedMetric& m, const std::vector<double>& p) {
  return levi_civita(m.jet(p.data(), 1)).gamma;
}
inline Array4 riemann(const ChartedMetric& m, const std::vector<double>& p) {
  if (m.dim() < 2) throw DimensionError("riemann needs dim >= 2");
  return riemann_from(levi_civita(m.jet(p.data(), 2)));
}
inline Eigen::MatrixXd ricci(const ChartedMetric& m, const std::vector<double>& p) { return curvature(m, p).ric; }
inline double scalar_curvature(const ChartedMetric& m, const std::vector<double>& p) { return curvature(m, p).scalar; }
inline Array4 weyl(const ChartedMetric& m, const std::vector<double>& p) { return curvature(m, p).weyl; }

// Smallest and largest eigenvalue of a symmetric form relative to g.
inline Eigen::VectorXd relative_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& g) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()), g);
  return es.eigenvalues();
}

namespace detail {
struct ScalarJet {
  double v;
  Eigen::VectorXd d;
  Eigen::MatrixXd dd;
};
inline ScalarJet scalar_jet(const Field& f, const std::vector<double>& p, const DerivOptions& opt) {
  if (f.ncomp() != 1) throw DimensionError("expected a scalar field");
  Jet j = driftlab::jet(f, p.data(), 2, opt);
  const int n = j.m;
  ScalarJet s{j.val(0), Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int a = 0; a < n; ++a) {
    s.d(a) = j.d(a, 0);
    for (int b = 0; b < n; ++b) s.dd(a, b) = j.dd(a, b, 0);
  }
  return s;
}
inline Eigen::MatrixXd covariant_hessian(const ScalarJet& f, const Array3& gamma) {
  const int n = static_cast<int>(f.d.size());
  Eigen::MatrixXd H = f.dd;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) H(i, j) -= gamma(k, i, j) * f.d(k);
  return H;
}
}  // namespace detail

// The displayed conformal formulas use the nonnegative Laplacian
// Delta f = -g^{ij} nabla_i d_j f; with that sign they agree with a direct
// recomputation of the curvature of e^{2f} g.
inline Eigen::MatrixXd conformal_ricci(const ChartedMetric& m, const Field& f, const std::vector<double>& p) {
  const int n = m.dim();
  if (n < 3) throw DimensionError("conformal_ricci needs dim >= 3");
  CurvatureBundle cb = curvature(m, p);
  auto fj = detail::scalar_jet(f, p, m.deriv());
  Eigen::MatrixXd hess = detail::covariant_hessian(fj, cb.gamma);
  double lap = -(cb.ginv.cwiseProduct(hess)).sum();
  double grad2 = fj.d.dot(cb.ginv * fj.d);
  return cb.ric - (n - 2.0) * (hess - fj.d * fj.d.transpose()) + (lap - (n - 2.0) * grad2) * cb.g;
}

inline double conformal_scalar(const ChartedMetric& m, const Field& f, const std::vector<double>& p) {
  const int n = m.dim();
  if (n < 3) throw DimensionError("conformal_scalar needs dim >= 3");
  CurvatureBundle cb = curvature(m, p);
  auto fj = detail::scalar_jet(f, p, m.deriv());
  Eigen::MatrixXd hess = detail::covariant_hessian(fj, cb.gamma);
  double lap = -(cb.ginv.cwiseProduct(hess)).sum();
  double grad2 = fj.d.dot(cb.ginv * fj.d);
  return std::exp(-2.0 * fj.v) * (cb.scalar + 2.0 * (n - 1.0) * lap - (n - 2.0) * (n - 1.0) * grad2);
}

// sup over unit X of |Ric(X,X) - S/(2(n-1))| plus 3(n-2)/2 |grad f|^2
inline double hessian_diag_bound_value(double ricci_deviation, double grad_f2, int n) {
  if (n < 3) throw DimensionError("hessian_diag_bound needs dim >= 3");
  return ricci_deviation + 1.5 * (n - 2.0) * grad_f2;
}

inline double ricci_deviation(const CurvatureBundle& cb) {
  Eigen::VectorXd ev = relative_eigenvalues(cb.ric, cb.g);
  double c = cb.scalar / (2.0 * (cb.n - 1));
  return std::max(std::abs(ev.minCoeff() - c), std::abs(ev.maxCoeff() - c));
}

inline double hessian_diag_bound(const ChartedMetric& m, const Field& f, const std::vector<double>& p) {
  const int n = m.dim();
  if (n < 3) throw DimensionError("hessian_diag_bound needs dim >= 3");
  CurvatureBundle cb = curvature(m, p);
  auto fj = detail::scalar_jet(f, p, m.deriv());
  return hessian_diag_bound_value(ricci_deviation(cb), fj.d.dot(cb.ginv * fj.d), n);
}

struct RicciLowerBound {
  double k = 0.0;
  double min_eigenvalue = 0.0;
  struct Level {
    std::vector<int> resolution;
    double k;
    double min_eigenvalue;
  };
  std::vector<Level> history;
  bool converged = true;  // relative change <= 1e-2 between the last two levels
};

inline RicciLowerBound::Level ricci_lower_level(const ChartedMetric& m, const Grid& grid) {
  for (int a = 0; a < grid.dim(); ++a)
    if (grid.n(a) < 4) throw PreconditionError("ricci_lower_bound needs resolution >= 4 per axis");
  const int n = m.dim();
  double mn = std::numeric_limits<double>::infinity();
  if (n < 2) mn = 0.0;
  else
    grid.for_each_reduced(m.invariant_axes(), [&](size_t, const std::vector<double>& x, double) {
      CurvatureBundle cb = curvature(m, x);
      mn = std::min(mn, relative_eigenvalues(cb.ric, cb.g).minCoeff());
    });
  double k = n < 2 ? 0.0 : std::max(0.0, -mn / (n - 1));
  return {grid.resolutions(), k, mn};
}

inline RicciLowerBound ricci_lower_bound(const ChartedMetric& m, const std::vector<Grid>& grids) {
  RicciLowerBound r;
  for (const auto& g : grids) r.history.push_back(ricci_lower_level(m, g));
  if (r.history.empty()) throw PreconditionError("ricci_lower_bound needs a grid");
  r.k = r.history.back().k;
  r.min_eigenvalue = r.history.back().min_eigenvalue;
  if (r.history.size() >= 2) {
    double a = r.history[r.history.size() - 2].k, b = r.k;
    double scale = std::max(std::abs(a), std::abs(b));
    r.converged = scale == 0.0 || std::abs(a - b) <= 1e-2 * scale;
  }
  return r;
}
inline RicciLowerBound ricci_lower_bound(const ChartedMetric& m, const Grid& grid) {
  return ricci_lower_bound(m, std::vector<Grid>{grid});
}

namespace detail {
// metric length of the straight segment x -> x + delta (Simpson rule)
inline double segment_length(const ChartedMetric& m, const std::vector<double>& x, const std::vector<double>& delta) {
  const int n = m.dim();
  auto speed = [&](double t) {
    std::vector<double> y(n);
    for (int a = 0; a < n; ++a) y[a] = x[a] + t * delta[a];
    Eigen::MatrixXd g = m.g(y);
    Eigen::Map<const Eigen::VectorXd> d(delta.data(), n);
    return std::sqrt(std::max(0.0, d.dot(g * d)));
  };
  return (speed(0.0) + 4.0 * speed(0.5) + speed(1.0)) / 6.0;
}
}  // namespace detail

struct DiameterEstimate {
  double d = 0.0;           // certified upper bound
  double graph_max = 0.0;   // max pairwise graph distance
  double pad = 0.0;         // 2 x largest metric half-diagonal of a cell
  std::vector<int> resolution;
};

// King-move graph, edge weights = metric length of the edge segment, all
// pairs by repeated Dijkstra. Sources along invariant axes are equivalent, so
// only the reduced node set is used as sources.
inline DiameterEstimate diameter_upper(const ChartedMetric& m, const Grid& grid) {
  const int n = grid.dim();
  std::vector<std::vector<int>> offs;
  {
    int total = 1;
    for (int a = 0; a < n; ++a) total *= 3;
    for (int c = 0; c < total; ++c) {
      std::vector<int> o(n);
      int q = c;
      bool zero = true;
      for (int a = 0; a < n; ++a) {
        o[a] = q % 3 - 1;
        q /= 3;
        zero = zero && o[a] == 0;
      }
      bool dup = false;  // keep each undirected direction once
      for (int a = 0; a < n; ++a) {
        if (o[a] != 0) {
          dup = o[a] < 0;
          break;
        }
      }
      if (!zero && !dup) offs.push_back(o);
    }
  }
  for (int a = 0; a < n; ++a)
    if (grid.n(a) < 3) throw PreconditionError("diameter grid needs resolution >= 3");
  const size_t N = grid.size(), K = offs.size();
  std::vector<double> w(N * K);
  std::vector<size_t> nb(N * K);
  double half_diag = 0.0;
  std::vector<int> mi(n), mj(n);
  for (size_t i = 0; i < N; ++i) {
    std::vector<double> x = grid.coords(i);
    grid.multi_index(i, mi.data());
    for (size_t k = 0; k < K; ++k) {
      std::vector<double> delta(n);
      for (int a = 0; a < n; ++a) {
        delta[a] = offs[k][a] * grid.h(a);
        mj[a] = mi[a] + offs[k][a];
      }
      w[i * K + k] = detail::segment_length(m, x, delta);
      nb[i * K + k] = grid.index(mj.data());
    }
    for (int s = 0; s < (1 << n); ++s) {
      std::vector<double> delta(n);
      for (int a = 0; a < n; ++a) delta[a] = ((s >> a) & 1 ? 1.0 : -1.0) * grid.h(a);
      half_diag = std::max(half_diag, 0.5 * detail::segment_length(m, x, delta));
    }
  }
  // undirected adjacency
  std::vector<std::vector<std::pair<size_t, double>>> adj(N);
  for (size_t i = 0; i < N; ++i)
    for (size_t k = 0; k < K; ++k) {
      size_t j = nb[i * K + k];
      if (j == i) continue;
      adj[i].push_back({j, w[i * K + k]});
      adj[j].push_back({i, w[i * K + k]});
    }
  double gmax = 0.0;
  std::vector<double> dist(N);
  using QE = std::pair<double, size_t>;
  grid.for_each_reduced(m.invariant_axes(), [&](size_t src, const std::vector<double>&, double) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    dist[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [dd, u] = pq.top();
      pq.pop();
      if (dd > dist[u]) continue;
      for (auto [v, wt] : adj[u]) {
        double nd = dd + wt;
        if (nd < dist[v]) {
          dist[v] = nd;
          pq.push({nd, v});
        }
      }
    }
    for (double v : dist) gmax = std::max(gmax, v);
  });
  DiameterEstimate est;
  est.graph_max = gmax;
  est.pad = 2.0 * half_diag;
  est.d = gmax + est.pad;
  est.resolution = grid.resolutions();
  return est;
}

// half the shortest period times the smallest metric stretch over the grid
inline double injectivity_proxy(const ChartedMetric& m, const Grid& grid) {
  double smin = std::numeric_limits<double>::infinity();
  grid.for_each_reduced(m.invariant_axes(), [&](size_t, const std::vector<double>& x, double) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.g(x));
    smin = std::min(smin, es.eigenvalues().minCoeff());
  });
  return 0.5 * m.chart().shortest_period() * std::sqrt(std::max(0.0, smin));
}

struct GlobalGeometryEstimates {
  double d = 0.0;
  double k = 0.0;
  double injectivity = 0.0;
  std::vector<int> resolution;
  DiameterEstimate diameter;
  RicciLowerBound ricci;
};

inline GlobalGeometryEstimates global_estimates(const ChartedMetric& m, const Grid& diameter_grid,
                                                const std::vector<Grid>& ricci_grids) {
  GlobalGeometryEstimates e;
  e.diameter = diameter_upper(m, diameter_grid);
  e.ricci = ricci_lower_bound(m, ricci_grids);
  e.d = e.diameter.d;
  e.k = e.ricci.k;
  e.injectivity = injectivity_proxy(m, diameter_grid);
  e.resolution = diameter_grid.resolutions();
  return e;
}

// CSV: coordinates, scalar curvature, then the flattened Ricci tensor
inline void curvature_csv(const ChartedMetric& m, const Grid& grid, std::ostream& os) {
  const int n = m.dim();
  for (int a = 0; a < n; ++a) os << "x" << a << ",";
  os << "S";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) os << ",Ric" << i << j;
  os << "\n";
  grid.for_each_reduced(m.invariant_axes(), [&](size_t, const std::vector<double>& x, double) {
    CurvatureBundle cb = curvature(m, x);
    for (double v : x) os << v << ",";
    os << cb.scalar;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) os << "," << cb.ric(i, j);
    os << "\n";
  });
}

}  // namespace driftlab
