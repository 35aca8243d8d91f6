#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "spectral.hpp"

namespace driftlab {

struct EigenPair {
  cplx lambda;  // L u + lambda u = 0
  Eigen::VectorXcd vector;
  double residual = 0.0;  // ||L u + lambda u|| / ||u||
};

struct RefinementEntry {
  std::vector<int> grid;
  double h = 0.0;
  cplx lambda;
};

struct SpectralResult {
  std::string method;
  cplx lambda;
  Eigen::VectorXcd eigenvector;
  double residual = INFINITY;
  bool converged = false;
  bool complex_principal = false;
  int multiplicity = 1;
  int iterations = 0;
  long applications = 0;
  std::vector<EigenPair> modes;  // copies of the principal eigenvalue (one per independent vector)
  std::vector<std::string> flags;
  std::vector<RefinementEntry> refinement;

  // real eigenvector scaled so that sup u = 1
  Eigen::VectorXd real_eigenfunction() const {
    Eigen::VectorXd u = eigenvector.real();
    if (u.norm() < 1e-3 * eigenvector.norm()) u = eigenvector.imag();
    double hi = u.maxCoeff(), lo = u.minCoeff();
    if (std::abs(lo) > std::abs(hi)) u = -u, hi = -lo;
    return u / hi;
  }
};

struct EigenOptions {
  double tol = 1e-8;       // residual contract
  int subspace = 48;       // basis size before a thick restart
  int keep = 12;           // Ritz vectors kept across a restart
  int max_restarts = 200;
  int max_multiplicity = 4;  // extra passes after locking to detect multiplicity
  double multiplicity_rtol = 1e-6;
  double gmres_tol = 1e-10;
  int gmres_restart = 50;
  long gmres_max_iter = -1;  // < 0: 10 N
  uint64_t seed = 12345;
  bool force_arnoldi = false;
};

namespace detail {

struct Inner {
  const Eigen::VectorXd* w = nullptr;  // null: Euclidean
  double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return w ? (w->array() * a.array() * b.array()).sum() : a.dot(b);
  }
  double norm(const Eigen::VectorXd& a) const { return std::sqrt(std::max(dot(a, a), 0.0)); }
};

// orthogonalize v against the columns of Q (and the extra set X), twice
inline void orthogonalize(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& Q, const Inner& ip) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : Q) v -= ip.dot(q, v) * q;
}

// both sets inside each pass: when V removes nearly all of v, a later pass
// against X alone would leave round-off from V dominating the remainder
inline void orthogonalize(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& X, const std::vector<Eigen::VectorXd>& V,
                          const Inner& ip) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : X) v -= ip.dot(q, v) * q;
    for (const auto& q : V) v -= ip.dot(q, v) * q;
  }
}

inline double true_residual(const DiscreteOperator& op, const Eigen::VectorXcd& u, cplx lambda) {
  Eigen::VectorXcd r = op.apply(u) + lambda * u;
  return r.norm() / u.norm();
}

inline Eigen::VectorXd random_vector(size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (size_t i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace detail

// Restarted GMRES with right diagonal preconditioning, x0 = 0.
struct GmresResult {
  Eigen::VectorXd x;
  double relres = INFINITY;
  long iterations = 0;
  bool converged = false;
};

template <class Apply>
GmresResult gmres(Apply&& A, const Eigen::VectorXd& b, const Eigen::VectorXd& diag, double tol, int restart, long max_iter) {
  const Eigen::Index n = b.size();
  GmresResult res;
  res.x = Eigen::VectorXd::Zero(n);
  const double bn = b.norm();
  if (bn == 0.0) {
    res.relres = 0.0;
    res.converged = true;
    return res;
  }
  Eigen::VectorXd dinv = diag.cwiseInverse();
  Eigen::VectorXd r = b;
  while (res.iterations < max_iter) {
    double beta = r.norm();
    res.relres = beta / bn;
    if (res.relres <= tol) break;
    const int m = restart;
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g[0] = beta;
    int j = 0;
    for (; j < m && res.iterations < max_iter; ++j) {
      ++res.iterations;
      Eigen::VectorXd z = dinv.cwiseProduct(V.col(j));
      Eigen::VectorXd w = A(z);
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          double hij = V.col(i).dot(w);
          H(i, j) += hij;
          w -= hij * V.col(i);
        }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      double den = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / den;
      sn[j] = H(j + 1, j) / den;
      H(j, j) = den;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      if (std::abs(g[j + 1]) / bn <= tol) {
        ++j;
        break;
      }
    }
    Eigen::VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    res.x += dinv.cwiseProduct(V.leftCols(j) * y);
    r = b - A(res.x);
  }
  res.relres = r.norm() / bn;
  res.converged = res.relres <= tol * 1.0001;
  return res;
}

namespace detail {

// One Krylov pass with thick restart. `S` is the iteration operator, `ip` the
// inner product, `deflate` vectors are projected out. Ritz values of S are
// mapped to lambda by `to_lambda` and the pass targets the smallest Re lambda.
// Convergence is judged by the caller's `accept` on the extracted vector.
struct PassOutcome {
  cplx lambda;
  Eigen::VectorXcd vec;  // in the S basis; the caller maps it back
  double residual = INFINITY;
  bool converged = false;
  int restarts = 0;
};

template <class S, class ToLambda, class Extract>
PassOutcome krylov_pass(S&& apply_s, size_t n, const Inner& ip, const std::vector<Eigen::VectorXd>& deflate,
                        bool symmetric, ToLambda&& to_lambda, Extract&& extract, const EigenOptions& opt, std::mt19937_64& rng,
                        double floor = 0.0) {
  PassOutcome out;
  std::vector<Eigen::VectorXd> V, SV;
  Eigen::VectorXd next = random_vector(n, rng);
  const int m = std::min(std::max(opt.subspace, opt.keep + 4), static_cast<int>(n) - static_cast<int>(deflate.size()) - 1);
  int last_gain = 0;
  double gain_ref = INFINITY;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    out.restarts = restart;
    while (static_cast<int>(V.size()) < m) {
      orthogonalize(next, deflate, V, ip);
      double nn = ip.norm(next);
      if (!(nn > 1e-300)) next = random_vector(n, rng), orthogonalize(next, deflate, V, ip), nn = ip.norm(next);
      next /= nn;
      V.push_back(next);
      SV.push_back(apply_s(next));
      next = SV.back();
    }
    const int k = static_cast<int>(V.size());
    Eigen::MatrixXd H(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) H(i, j) = ip.dot(V[i], SV[j]);
    Eigen::MatrixXcd Y;
    Eigen::VectorXcd theta;
    if (symmetric) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
      Y = es.eigenvectors().cast<cplx>();
      theta = es.eigenvalues().cast<cplx>();
    } else {
      Eigen::EigenSolver<Eigen::MatrixXd> es(H);
      Y = es.eigenvectors();
      theta = es.eigenvalues();
    }
    // order by Re lambda among admissible (finite, Re lambda > 0)
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    std::vector<cplx> lam(k);
    for (int i = 0; i < k; ++i) lam[i] = to_lambda(theta[i]);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return lam[a].real() < lam[b].real(); });
    // the wanted value; `floor` keeps round-off copies of the kernel out
    int best = idx[0];
    for (int i : idx)
      if (lam[i].real() > floor) {
        best = i;
        break;
      }
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < k; ++i) u += Y(i, best) * V[i].cast<cplx>();
    auto [lambda, vec, res] = extract(lam[best], u);
    if (res < out.residual) {
      out.lambda = lambda;
      out.vec = vec;
      out.residual = res;
    }
    if (res <= opt.tol) {
      out.converged = true;
      return out;
    }
    if (res < 0.1 * gain_ref) gain_ref = res, last_gain = restart;
    // residual direction: S v_last orthogonalized against the whole current basis.
    // A single start vector sees one direction per degenerate eigenspace and can
    // stall there, so a stagnating pass continues from a fresh random direction.
    if (restart - last_gain >= 10) next = random_vector(n, rng), last_gain = restart;
    orthogonalize(next, deflate, V, ip);
    // thick restart: keep the smallest Ritz vectors, real-ified
    std::vector<Eigen::VectorXd> cols;
    for (int i : idx) {
      if (static_cast<int>(cols.size()) >= opt.keep) break;
      if (!(lam[i].real() > floor)) continue;
      Eigen::VectorXd re = Y.col(i).real(), im = Y.col(i).imag();
      cols.push_back(re);
      if (im.norm() > 1e-12 * re.norm()) cols.push_back(im);
    }
    Eigen::MatrixXd Yk(k, cols.size());
    for (size_t c = 0; c < cols.size(); ++c) Yk.col(c) = cols[c];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Yk);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(k, cols.size());
    std::vector<Eigen::VectorXd> V2, SV2;
    for (int c = 0; c < Q.cols(); ++c) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n), sv = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < k; ++i) {
        v += Q(i, c) * V[i];
        sv += Q(i, c) * SV[i];
      }
      V2.push_back(v);
      SV2.push_back(sv);
    }
    V.swap(V2);
    SV.swap(SV2);
  }
  return out;
}

}  // namespace detail

// Grids too small for a Krylov basis: full eigendecomposition.
inline SpectralResult principal_eigenvalue_dense(const DiscreteOperator& op, const EigenOptions& opt = {}) {
  if (op.size() > 4096) throw SizeError("dense eigensolve limited to 4096 nodes");
  Eigen::EigenSolver<Eigen::MatrixXd> es(op.materialize());
  if (es.info() != Eigen::Success) throw NonConvergence("dense QR iteration failed");
  SpectralResult R;
  R.method = "dense QR";
  const double scale = std::max(1.0, op.diagonal().cwiseAbs().maxCoeff());
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) > 1e-9 * scale) idx.push_back(static_cast<int>(i));
  if (idx.empty()) throw NonConvergence("operator has no nonzero eigenvalue");
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return -es.eigenvalues()[a].real() < -es.eigenvalues()[b].real(); });
  R.lambda = -es.eigenvalues()[idx[0]];
  for (int i : idx) {
    cplx l = -es.eigenvalues()[i];
    if (std::abs(l - R.lambda) > opt.multiplicity_rtol * std::abs(R.lambda)) break;
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    R.modes.push_back({l, v, detail::true_residual(op, v, l)});
  }
  R.eigenvector = R.modes[0].vector;
  R.residual = R.modes[0].residual;
  R.converged = R.residual <= opt.tol;
  R.multiplicity = static_cast<int>(R.modes.size());
  if (std::abs(R.lambda.imag()) > 1e-6 * std::abs(R.lambda.real())) {
    R.complex_principal = true;
    R.flags.push_back("complex principal eigenvalue; real part reported");
  }
  return R;
}

// Smallest nonzero mode of L u + lambda u = 0.
//  - self-adjoint-weighted: thick-restart Lanczos on -L in the weighted
//    inner product with the constant mode projected out
//  - otherwise: shift-invert Arnoldi at 0 on B = -L + sigma 1 z^T (Brauer
//    shift moves the zero eigenvalue to sigma), GMRES inner solves
inline SpectralResult principal_eigenvalue(const DiscreteOperator& op, const EigenOptions& opt = {}) {
  const size_t n = op.size();
  const double cdef = op.constant_defect();
  if (cdef > 1e-10 * std::sqrt(static_cast<double>(n)) * std::max(1.0, op.diagonal().cwiseAbs().maxCoeff()))
    throw PreconditionError("constant vector is not in the operator kernel");
  SpectralResult R;
  if (n <= static_cast<size_t>(2 * std::max(opt.subspace, opt.keep + 4))) return principal_eigenvalue_dense(op, opt);
  std::mt19937_64 rng(opt.seed);
  const bool sym = op.symmetry == SymmetryClass::self_adjoint_weighted && !opt.force_arnoldi;
  Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  long apps = 0;
  int iters = 0;
  std::vector<Eigen::VectorXd> locked;

  auto run_pass = [&](std::vector<Eigen::VectorXd> deflate) -> detail::PassOutcome {
    if (sym) {
      R.method = "thick-restart Lanczos (weighted)";
      detail::Inner ip{&op.weight};
      deflate.insert(deflate.begin(), one / ip.norm(one));
      auto S = [&](const Eigen::VectorXd& v) {
        ++apps;
        return Eigen::VectorXd(-op.apply(v));
      };
      auto extract = [&](cplx th, const Eigen::VectorXcd& u) {
        cplx lam = th.real();
        return std::tuple<cplx, Eigen::VectorXcd, double>(lam, u, detail::true_residual(op, u, lam));
      };
      return detail::krylov_pass(S, n, ip, deflate, true, [](cplx t) { return cplx(t.real(), 0.0); }, extract, opt, rng,
                                 1e-9 * std::max(1.0, op.diagonal().cwiseAbs().maxCoeff()));
    }
    R.method = "shift-invert Arnoldi (Brauer-shifted, GMRES)";
    detail::Inner ip{};
    Eigen::VectorXd dg = -op.diagonal();
    const double sigma = std::max(1.0, dg.cwiseAbs().maxCoeff());
    const double zc = 1.0 / static_cast<double>(n);
    auto B = [&](const Eigen::VectorXd& v) {
      ++apps;
      Eigen::VectorXd r = -op.apply(v);
      r.array() += sigma * zc * v.sum();
      return r;
    };
    Eigen::VectorXd pre = dg.array() + sigma * zc;
    for (Eigen::Index i = 0; i < pre.size(); ++i)
      if (!(std::abs(pre[i]) > 0.0)) pre[i] = 1.0;
    const long maxit = opt.gmres_max_iter > 0 ? opt.gmres_max_iter : 10 * static_cast<long>(n);
    bool solve_failed = false;
    auto S = [&](const Eigen::VectorXd& v) {
      ++iters;
      // deflated vectors are handled by orthogonalization; solve B x = v
      GmresResult g = gmres(B, v, pre, opt.gmres_tol, opt.gmres_restart, maxit);
      if (!g.converged) solve_failed = true;
      return g.x;
    };
    auto to_lambda = [](cplx mu) { return std::abs(mu) > 0.0 ? 1.0 / mu : cplx(INFINITY, 0.0); };
    auto extract = [&](cplx lam, const Eigen::VectorXcd& x) {
      // eigenvector of B -> eigenvector of -L: x - (sigma z^T x / lambda) 1
      cplx zx = zc * x.sum();
      Eigen::VectorXcd u = x - (sigma * zx / lam) * one.cast<cplx>();
      // one Rayleigh quotient refinement of lambda
      Eigen::VectorXcd Au = -op.apply(u);
      cplx rq = u.dot(Au) / u.squaredNorm();
      double r1 = detail::true_residual(op, u, lam), r2 = detail::true_residual(op, u, rq);
      if (r2 < r1) lam = rq, r1 = r2;
      return std::tuple<cplx, Eigen::VectorXcd, double>(lam, u, r1);
    };
    auto out = detail::krylov_pass(S, n, ip, deflate, false, to_lambda, extract, opt, rng);
    if (solve_failed) R.flags.push_back("inner GMRES solve did not reach tolerance");
    return out;
  };

  auto first = run_pass({});
  iters += first.restarts;
  R.lambda = first.lambda;
  R.eigenvector = first.vec;
  R.residual = first.residual;
  R.converged = first.converged;
  R.modes.push_back({first.lambda, first.vec, first.residual});
  if (!R.converged) R.flags.push_back("NonConvergence: best residual " + std::to_string(R.residual));

  // multiplicity: lock and search again
  if (R.converged && std::abs(R.lambda.imag()) <= 1e-6 * std::abs(R.lambda.real())) {
    auto lock = [&](const Eigen::VectorXcd& u) {
      detail::Inner ip{sym ? &op.weight : nullptr};
      Eigen::VectorXd v = u.real();
      if (v.norm() < 1e-6 * u.norm()) v = u.imag();
      detail::orthogonalize(v, locked, ip);
      locked.push_back(v / ip.norm(v));
    };
    lock(first.vec);
    for (int pass = 1; pass <= opt.max_multiplicity; ++pass) {
      if (!sym) break;  // right eigenvectors of a non-normal operator are not orthogonal; no locking
      auto more = run_pass(locked);
      iters += more.restarts;
      if (!more.converged || std::abs(more.lambda - R.lambda) > opt.multiplicity_rtol * std::abs(R.lambda)) break;
      R.modes.push_back({more.lambda, more.vec, more.residual});
      lock(more.vec);
    }
  }
  R.multiplicity = static_cast<int>(R.modes.size());
  if (std::abs(R.lambda.imag()) > 1e-6 * std::abs(R.lambda.real())) {
    R.complex_principal = true;
    R.flags.push_back("complex principal eigenvalue; real part reported");
  }
  R.iterations = iters;
  R.applications = apps;
  return R;
}

// Dense eigendecomposition by unsymmetric QR (Eigen::EigenSolver); lambda = -eig(L), sorted by Re.
struct DenseSpectrum {
  std::vector<cplx> lambda;
  double max_imag = 0.0;
};

inline DenseSpectrum dense_spectrum(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) throw NonConvergence("dense QR iteration failed");
  DenseSpectrum s;
  for (Eigen::Index i = 0; i < M.rows(); ++i) s.lambda.push_back(-es.eigenvalues()[i]);
  std::sort(s.lambda.begin(), s.lambda.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  for (auto l : s.lambda) s.max_imag = std::max(s.max_imag, std::abs(l.imag()));
  return s;
}

inline constexpr size_t kDenseOracleLimit = 4096;

inline DenseSpectrum dense_oracle(const DiscreteOperator& op) {
  if (op.size() > kDenseOracleLimit) throw SizeError("dense oracle limited to 4096 nodes");
  return dense_spectrum(op.materialize());
}

// smallest Re lambda among modes with |lambda| above the kernel threshold
inline cplx dense_principal(const DenseSpectrum& s, double zero_tol = 1e-9) {
  for (auto l : s.lambda)
    if (std::abs(l) > zero_tol) return l;
  throw NonConvergence("no nonzero eigenvalue in dense spectrum");
}

}  // namespace driftlab
