#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "chart.hpp"
#include "field.hpp"

namespace driftlab {

inline DerivOptions resolve_step(DerivOptions d, const PeriodicChart& c) {
  if (d.scheme == DerivScheme::central_difference && !(d.step > 0.0)) d.step = 1e-3 * c.shortest_period();
  return d;
}

// Riemannian metric on a periodic chart. Components are stored row-major,
// g(mu, nu) = comp[mu * dim + nu].
class ChartedMetric {
 public:
  ChartedMetric() = default;
  ChartedMetric(PeriodicChart chart, FieldPtr g, DerivOptions d = {}, std::vector<bool> invariant = {})
      : chart_(std::move(chart)), g_(std::move(g)), deriv_(resolve_step(d, chart_)), invariant_(std::move(invariant)) {
    const int n = chart_.dim();
    if (g_->dim() != n || g_->ncomp() != n * n) throw DimensionError("metric field has wrong shape");
    if (invariant_.empty()) invariant_.assign(n, false);
  }

  const PeriodicChart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  const FieldPtr& field() const { return g_; }
  const DerivOptions& deriv() const { return deriv_; }
  // axes along which every component is constant (declared by the catalog)
  const std::vector<bool>& invariant_axes() const { return invariant_; }

  Eigen::MatrixXd g(const double* p) const {
    const int n = dim();
    std::vector<double> v(n * n);
    g_->eval(p, v.data());
    detail::check_finite(v.data(), n * n, "metric evaluation");
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = v[i * n + j];
    return m;
  }
  Eigen::MatrixXd g(const std::vector<double>& p) const { return g(p.data()); }

  Jet jet(const double* p, int order = 2) const { return driftlab::jet(*g_, p, order, deriv_); }

  ChartedMetric with_scheme(DerivOptions d) const { return ChartedMetric(chart_, g_, d, invariant_); }

  // g -> rho2 * g
  ChartedMetric scaled(double rho2) const {
    FieldPtr base = g_;
    const int n = dim();
    auto f = make_field(n, n * n, [base, rho2, n](const auto* x, auto* out) {
      base->eval(x, out);
      for (int i = 0; i < n * n; ++i) out[i] = out[i] * rho2;
    });
    return ChartedMetric(chart_, f, deriv_, invariant_);
  }

 private:
  PeriodicChart chart_;
  FieldPtr g_;
  DerivOptions deriv_;
  std::vector<bool> invariant_;
};

// A real one-form xi_mu with its first partials dxi[mu * dim + nu] = d_mu xi_nu.
class OneFormField {
 public:
  using Sampler = std::function<void(const double* p, double* xi, double* dxi)>;

  OneFormField() = default;
  explicit OneFormField(FieldPtr f) : dim_(f->dim()), f_(std::move(f)) {
    if (f_->ncomp() != dim_) throw DimensionError("one-form field needs dim components");
  }
  OneFormField(int dim, Sampler s) : dim_(dim), sampler_(std::move(s)) {}
  static OneFormField zero(int dim) {
    return OneFormField(make_field(dim, dim, [dim](const auto*, auto* out) {
      for (int i = 0; i < dim; ++i) out[i] = 0.0;
    }));
  }
  // xi = d phi for a scalar field phi
  static OneFormField exact(FieldPtr phi) {
    const int n = phi->dim();
    return OneFormField(n, [phi, n](const double* p, double* xi, double* dxi) {
      Jet j = driftlab::jet(*phi, p, 2);
      for (int mu = 0; mu < n; ++mu) {
        xi[mu] = j.d(mu, 0);
        if (dxi)
          for (int nu = 0; nu < n; ++nu) dxi[mu * n + nu] = j.dd(mu, nu, 0);
      }
    });
  }

  int dim() const { return dim_; }

  void sample(const double* p, double* xi, double* dxi = nullptr) const {
    if (sampler_) {
      sampler_(p, xi, dxi);
      return;
    }
    Jet j = driftlab::jet(*f_, p, dxi ? 1 : 0);
    for (int nu = 0; nu < dim_; ++nu) {
      xi[nu] = j.val(nu);
      if (dxi)
        for (int mu = 0; mu < dim_; ++mu) dxi[mu * dim_ + nu] = j.d(mu, nu);
    }
  }
  std::vector<double> values(const std::vector<double>& p) const {
    std::vector<double> xi(dim_);
    sample(p.data(), xi.data());
    return xi;
  }

  double sup_norm_cache = -1.0;  // optional, < 0 when unset

 private:
  int dim_ = 0;
  FieldPtr f_;
  Sampler sampler_;
};

}  // namespace driftlab
