#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "chart.hpp"

namespace driftlab {

// Uniform periodic grid. Axis 0 varies fastest in the linear node index.
class Grid {
 public:
  Grid() = default;
  Grid(PeriodicChart chart, std::vector<int> n) : chart_(std::move(chart)), n_(std::move(n)) {
    if (n_.size() == 1 && chart_.dim() > 1) n_.assign(chart_.dim(), n_[0]);
    if (static_cast<int>(n_.size()) != chart_.dim()) throw DimensionError("grid resolution list has wrong length");
    total_ = 1;
    for (int a = 0; a < dim(); ++a) {
      if (n_[a] < 2) throw PreconditionError("grid resolution must be at least 2");
      h_.push_back(chart_.period(a) / n_[a]);
      stride_.push_back(total_);
      total_ *= static_cast<size_t>(n_[a]);
    }
  }
  Grid(PeriodicChart chart, int n) : Grid(chart, std::vector<int>(chart.dim(), n)) {}

  const PeriodicChart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  size_t size() const { return total_; }
  int n(int axis) const { return n_[axis]; }
  const std::vector<int>& resolutions() const { return n_; }
  double h(int axis) const { return h_[axis]; }
  double max_h() const {
    double m = 0.0;
    for (double v : h_) m = std::max(m, v);
    return m;
  }
  double cell_volume() const {
    double v = 1.0;
    for (double x : h_) v *= x;
    return v;
  }

  void multi_index(size_t idx, int* out) const {
    for (int a = 0; a < dim(); ++a) {
      out[a] = static_cast<int>(idx % n_[a]);
      idx /= n_[a];
    }
  }
  size_t index(const int* mi) const {
    size_t idx = 0;
    for (int a = 0; a < dim(); ++a) {
      int k = mi[a] % n_[a];
      if (k < 0) k += n_[a];
      idx += stride_[a] * k;
    }
    return idx;
  }
  size_t shift(size_t idx, int axis, int s) const {
    int k = static_cast<int>((idx / stride_[axis]) % n_[axis]);
    int k2 = ((k + s) % n_[axis] + n_[axis]) % n_[axis];
    return idx + stride_[axis] * (static_cast<size_t>(k2)) - stride_[axis] * static_cast<size_t>(k);
  }
  std::vector<double> coords(size_t idx) const {
    std::vector<double> x(dim());
    for (int a = 0; a < dim(); ++a) {
      x[a] = h_[a] * static_cast<double>(idx % n_[a]);
      idx /= n_[a];
    }
    return x;
  }

  // Visit nodes with the invariant axes pinned at 0. Each visited node stands
  // for `multiplicity` nodes of the full grid.
  template <class F>
  void for_each_reduced(const std::vector<bool>& invariant, F&& f) const {
    std::vector<int> free_axes;
    double mult = 1.0;
    for (int a = 0; a < dim(); ++a) {
      if (a < static_cast<int>(invariant.size()) && invariant[a]) mult *= n_[a];
      else free_axes.push_back(a);
    }
    size_t count = 1;
    for (int a : free_axes) count *= n_[a];
    std::vector<int> mi(dim(), 0);
    for (size_t r = 0; r < count; ++r) {
      size_t q = r;
      for (int a : free_axes) {
        mi[a] = static_cast<int>(q % n_[a]);
        q /= n_[a];
      }
      size_t idx = index(mi.data());
      f(idx, coords(idx), mult);
    }
  }

 private:
  PeriodicChart chart_;
  std::vector<int> n_;
  std::vector<double> h_;
  std::vector<size_t> stride_;
  size_t total_ = 0;
};

}  // namespace driftlab
