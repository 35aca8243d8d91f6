#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "dual.hpp"
#include "errors.hpp"

namespace driftlab {

// A callable of ncomp real component functions on R^dim. Evaluable on
// doubles and on nested duals, so jets can be taken exactly.
class Field {
 public:
  Field(int dim, int ncomp) : dim_(dim), ncomp_(ncomp) {}
  virtual ~Field() = default;

  int dim() const { return dim_; }
  int ncomp() const { return ncomp_; }

  virtual void eval(const double* x, double* out) const = 0;
  virtual void eval(const ad::D1* x, ad::D1* out) const = 0;
  virtual void eval(const ad::D2* x, ad::D2* out) const = 0;

  std::vector<double> operator()(const std::vector<double>& x) const {
    std::vector<double> out(ncomp_);
    eval(x.data(), out.data());
    return out;
  }

 private:
  int dim_, ncomp_;
};

using FieldPtr = std::shared_ptr<const Field>;

template <class F>
class LambdaField final : public Field {
 public:
  LambdaField(int dim, int ncomp, F f) : Field(dim, ncomp), f_(std::move(f)) {}
  void eval(const double* x, double* out) const override { f_(x, out); }
  void eval(const ad::D1* x, ad::D1* out) const override { f_(x, out); }
  void eval(const ad::D2* x, ad::D2* out) const override { f_(x, out); }

 private:
  F f_;
};

// f must be a generic callable (const S* x, S* out) for S in {double, D1, D2}.
template <class F>
FieldPtr make_field(int dim, int ncomp, F f) {
  return std::make_shared<LambdaField<F>>(dim, ncomp, std::move(f));
}

enum class DerivScheme { analytic, central_difference };

struct DerivOptions {
  DerivScheme scheme = DerivScheme::analytic;
  double step = 0.0;  // FD step; <= 0 means 1e-3 x shortest period, resolved by the owner
};

// values, first and second partials of every component at a point
struct Jet {
  int m = 0, nc = 0, order = 0;
  std::vector<double> v, d1, d2;

  double val(int c) const { return v[c]; }
  double d(int mu, int c) const { return d1[mu * nc + c]; }
  double dd(int mu, int nu, int c) const { return d2[(mu * m + nu) * nc + c]; }
};

namespace detail {

inline void check_finite(const double* v, int n, const char* where) {
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(v[i])) throw NumericalDomainError(std::string("non-finite component value in ") + where);
}

inline Jet analytic_jet(const Field& f, const double* x, int order) {
  const int m = f.dim(), nc = f.ncomp();
  Jet j;
  j.m = m; j.nc = nc; j.order = order;
  j.v.resize(nc);
  if (order <= 0) {
    f.eval(x, j.v.data());
    check_finite(j.v.data(), nc, "field evaluation");
    return j;
  }
  j.d1.assign(m * nc, 0.0);
  if (order == 1) {
    std::vector<ad::D1> xs(m), out(nc);
    for (int mu = 0; mu < m; ++mu) {
      for (int r = 0; r < m; ++r) xs[r] = ad::D1(x[r], r == mu ? 1.0 : 0.0);
      f.eval(xs.data(), out.data());
      for (int c = 0; c < nc; ++c) {
        j.v[c] = out[c].v;
        j.d1[mu * nc + c] = out[c].d;
      }
    }
    check_finite(j.v.data(), nc, "field evaluation");
    check_finite(j.d1.data(), m * nc, "field derivative");
    return j;
  }
  j.d2.assign(m * m * nc, 0.0);
  std::vector<ad::D2> xs(m), out(nc);
  for (int mu = 0; mu < m; ++mu) {
    for (int nu = mu; nu < m; ++nu) {
      for (int r = 0; r < m; ++r)
        xs[r] = ad::D2(ad::D1(x[r], r == mu ? 1.0 : 0.0), ad::D1(r == nu ? 1.0 : 0.0, 0.0));
      f.eval(xs.data(), out.data());
      for (int c = 0; c < nc; ++c) {
        j.v[c] = out[c].v.v;
        j.d1[mu * nc + c] = out[c].v.d;
        j.d1[nu * nc + c] = out[c].d.v;
        j.d2[(mu * m + nu) * nc + c] = out[c].d.d;
        j.d2[(nu * m + mu) * nc + c] = out[c].d.d;
      }
    }
  }
  check_finite(j.v.data(), nc, "field evaluation");
  check_finite(j.d1.data(), m * nc, "field derivative");
  check_finite(j.d2.data(), m * m * nc, "field second derivative");
  return j;
}

// 4th-order central stencils
inline Jet fd_jet(const Field& f, const double* x, int order, double h) {
  static constexpr std::array<int, 4> off{-2, -1, 1, 2};
  static constexpr std::array<double, 4> w1{1.0, -8.0, 8.0, -1.0};  // / 12h
  const int m = f.dim(), nc = f.ncomp();
  Jet j;
  j.m = m; j.nc = nc; j.order = order;
  j.v.resize(nc);
  std::vector<double> xs(x, x + m), out(nc);
  auto sample = [&](double* dst) {
    f.eval(xs.data(), dst);
    check_finite(dst, nc, "FD stencil point");
  };
  sample(j.v.data());
  if (order <= 0) return j;
  j.d1.assign(m * nc, 0.0);
  if (order >= 2) j.d2.assign(m * m * nc, 0.0);
  for (int mu = 0; mu < m; ++mu) {
    std::array<std::vector<double>, 4> fs;
    for (int s = 0; s < 4; ++s) {
      fs[s].resize(nc);
      xs[mu] = x[mu] + off[s] * h;
      sample(fs[s].data());
    }
    xs[mu] = x[mu];
    for (int c = 0; c < nc; ++c) {
      double acc = 0.0;
      for (int s = 0; s < 4; ++s) acc += w1[s] * fs[s][c];
      j.d1[mu * nc + c] = acc / (12.0 * h);
      if (order >= 2) {
        double dd = -fs[0][c] + 16.0 * fs[1][c] - 30.0 * j.v[c] + 16.0 * fs[2][c] - fs[3][c];
        j.d2[(mu * m + mu) * nc + c] = dd / (12.0 * h * h);
      }
    }
  }
  if (order >= 2) {
    for (int mu = 0; mu < m; ++mu)
      for (int nu = mu + 1; nu < m; ++nu) {
        std::vector<double> acc(nc, 0.0);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            xs[mu] = x[mu] + off[a] * h;
            xs[nu] = x[nu] + off[b] * h;
            sample(out.data());
            for (int c = 0; c < nc; ++c) acc[c] += w1[a] * w1[b] * out[c];
          }
        xs[mu] = x[mu];
        xs[nu] = x[nu];
        for (int c = 0; c < nc; ++c) {
          double val = acc[c] / (144.0 * h * h);
          j.d2[(mu * m + nu) * nc + c] = val;
          j.d2[(nu * m + mu) * nc + c] = val;
        }
      }
  }
  return j;
}

}  // namespace detail

inline Jet jet(const Field& f, const double* x, int order, const DerivOptions& opt = {}) {
  if (opt.scheme == DerivScheme::analytic) return detail::analytic_jet(f, x, order);
  if (!(opt.step > 0.0)) throw PreconditionError("central-difference scheme needs a positive step");
  return detail::fd_jet(f, x, order, opt.step);
}

inline std::vector<double> partial_derivative(const Field& f, const std::vector<double>& p, int axis,
                                              const DerivOptions& opt = {}) {
  if (axis < 0 || axis >= f.dim()) throw IndexError("axis out of range");
  const int nc = f.ncomp();
  std::vector<double> res(nc);
  if (opt.scheme == DerivScheme::analytic) {
    std::vector<ad::D1> xs(f.dim()), out(nc);
    for (int r = 0; r < f.dim(); ++r) xs[r] = ad::D1(p[r], r == axis ? 1.0 : 0.0);
    f.eval(xs.data(), out.data());
    for (int c = 0; c < nc; ++c) res[c] = out[c].d;
    detail::check_finite(res.data(), nc, "field derivative");
    return res;
  }
  if (!(opt.step > 0.0)) throw PreconditionError("central-difference scheme needs a positive step");
  const double h = opt.step;
  std::vector<double> xs = p, f0(nc), f1(nc), f2(nc), f3(nc);
  auto at = [&](double s, std::vector<double>& dst) {
    xs[axis] = p[axis] + s * h;
    f.eval(xs.data(), dst.data());
    detail::check_finite(dst.data(), nc, "FD stencil point");
  };
  at(-2, f0); at(-1, f1); at(1, f2); at(2, f3);
  for (int c = 0; c < nc; ++c) res[c] = (f0[c] - 8.0 * f1[c] + 8.0 * f2[c] - f3[c]) / (12.0 * h);
  return res;
}

}  // namespace driftlab
