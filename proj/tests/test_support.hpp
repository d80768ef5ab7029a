#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fbmhd/grid.hpp"
#include "fbmhd/tensor.hpp"

namespace fbmhd::testkit {

/// Least-squares slope of log(e) against log(h).
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Random band-limited trigonometric field: tangential modes |k| <= kmax, one smooth y3 factor
/// that is also periodic on [-1, 1]. Peak bound `amp`.
inline Field smooth_field(const Grid& g, double amp, unsigned seed, int kmax = 2) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr double pi = std::numbers::pi;
  struct Mode {
    int k1, k2, m3;
    double c, phase, phase3;
  };
  std::vector<Mode> modes;
  double total = 0.0;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = -kmax; k2 <= kmax; ++k2) {
      if (std::abs(k1) + std::abs(k2) > kmax) continue;
      Mode m{k1, k2, static_cast<int>(rng() % 2), u(rng), pi * u(rng), pi * u(rng)};
      total += std::abs(m.c);
      modes.push_back(m);
    }
  return g.sample([&](double y1, double y2, double y3) {
    double s = 0.0;
    for (const auto& m : modes)
      s += m.c * std::sin(2 * pi * (m.k1 * y1 + m.k2 * y2) + m.phase) * std::cos(pi * m.m3 * y3 + m.phase3);
    return amp * s / total;
  });
}

inline VectorField smooth_vector(const Grid& g, double amp, unsigned seed, int kmax = 2) {
  return {smooth_field(g, amp, seed, kmax), smooth_field(g, amp, seed + 101, kmax), smooth_field(g, amp, seed + 202, kmax)};
}

/// Identity plus a random band-limited perturbation of peak `amp`.
inline VectorField smooth_map(const Grid& g, double amp, unsigned seed, int kmax = 2) {
  VectorField eta = identity_map(g);
  const VectorField xi = smooth_vector(g, amp, seed, kmax);
  for (int i = 0; i < 3; ++i) eta[static_cast<std::size_t>(i)] += xi[static_cast<std::size_t>(i)];
  return eta;
}

}  // namespace fbmhd::testkit
