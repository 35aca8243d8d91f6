#pragma once

#include <random>

#include "driftlab.hpp"

namespace testsupport {

using namespace driftlab;

// non-Kahler, non-balanced h on the 2 pi torus with an off-diagonal entry
inline HermitianStructure generic_hermitian2() {
  auto h = make_field(4, 8, [](const auto* x, auto* o) {
    for (int i = 0; i < 8; ++i) o[i] = 0.0 * x[0];
    o[0] = 1.0 + 0.2 * ad::sin(x[0] + x[3]);
    o[6] = 1.0 + 0.15 * ad::cos(x[1] - x[2]);
    o[2] = 0.1 * ad::sin(x[2]);   // Re h_12
    o[3] = 0.05 * ad::cos(x[0]);  // Im h_12
    o[4] = o[2];                  // h_21 = conj(h_12)
    o[5] = -1.0 * o[3];
  });
  return HermitianStructure(PeriodicChart::uniform(4, 2 * M_PI), 2, h);
}

inline HermitianStructure generic_hermitian3() {
  auto h = make_field(6, 18, [](const auto* x, auto* o) {
    for (int i = 0; i < 18; ++i) o[i] = 0.0 * x[0];
    o[0] = 1.0 + 0.2 * ad::sin(x[0] + x[5]);
    o[8] = 1.2 + 0.1 * ad::cos(x[2]) * ad::sin(x[3]);
    o[16] = 0.9 + 0.1 * ad::sin(x[1] - x[4]);
    o[2] = 0.08 * ad::cos(x[4]);  // h_12
    o[3] = 0.05 * ad::sin(x[1]);
    o[6] = o[2];
    o[7] = -1.0 * o[3];
    o[10] = 0.06 * ad::sin(x[0]);  // h_23
    o[11] = 0.04 * ad::cos(x[3] + x[2]);
    o[14] = o[10];
    o[15] = -1.0 * o[11];
  });
  return HermitianStructure(PeriodicChart::uniform(6, 2 * M_PI), 3, h);
}

inline std::vector<std::vector<double>> random_points(int dim, int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 2 * M_PI);
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& v : p) v = U(rng);
  return pts;
}

// smooth SPD metric on a 3-torus
inline ChartedMetric wobbly3() {
  auto g = make_field(3, 9, [](const auto* x, auto* o) {
    auto a = 1.0 + 0.3 * ad::sin(x[0]) * ad::cos(x[1]);
    auto b = 1.5 + 0.2 * ad::cos(x[2] - x[0]);
    auto c = 0.8 + 0.1 * ad::sin(x[1] + x[2]);
    auto e = 0.1 * ad::sin(x[2]);
    o[0] = a; o[1] = e; o[2] = 0.0 * a;
    o[3] = e; o[4] = b; o[5] = 0.05 * ad::cos(x[0]);
    o[6] = 0.0 * a; o[7] = o[5]; o[8] = c;
  });
  return ChartedMetric(PeriodicChart::uniform(3, 2 * M_PI), g);
}

}  // namespace testsupport
