#pragma once

#include <cmath>

namespace driftlab {

// Neumaier compensated summation
struct CompensatedSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) c += (sum - t) + x;
    else c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// least-squares slope of log(err) against log(h)
template <class V>
double observed_order(const V& h, const V& err) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t m = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!(err[i] > 0.0) || !(h[i] > 0.0)) continue;
    double x = std::log(h[i]), y = std::log(err[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace driftlab
