#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace driftlab {

class PeriodicChart {
 public:
  PeriodicChart() = default;
  explicit PeriodicChart(std::vector<double> periods) : periods_(std::move(periods)) {
    if (periods_.empty()) throw PreconditionError("chart needs dim >= 1");
    for (double p : periods_)
      if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("chart periods must be positive");
  }
  static PeriodicChart uniform(int dim, double period) {
    return PeriodicChart(std::vector<double>(dim, period));
  }

  int dim() const { return static_cast<int>(periods_.size()); }
  const std::vector<double>& periods() const { return periods_; }
  double period(int axis) const { return periods_.at(axis); }
  double shortest_period() const { return *std::min_element(periods_.begin(), periods_.end()); }

  double canonicalize(int axis, double x) const {
    double p = periods_[axis];
    double r = x - p * std::floor(x / p);
    if (r >= p) r -= p;
    if (r < 0.0) r = 0.0;
    return r;
  }
  std::vector<double> canonicalize(std::vector<double> x) const {
    if (static_cast<int>(x.size()) != dim()) throw IndexError("point has wrong dimension");
    for (int a = 0; a < dim(); ++a) x[a] = canonicalize(a, x[a]);
    return x;
  }

 private:
  std::vector<double> periods_;
};

inline std::vector<double> canonicalize_point(const PeriodicChart& c, const std::vector<double>& p) {
  return c.canonicalize(p);
}

}  // namespace driftlab
