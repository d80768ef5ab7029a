#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fbmhd/grid.hpp"

using namespace fbmhd;
namespace {
constexpr double pi = std::numbers::pi;

double max_diff(const Field& a, const Field& b) { return max_abs(a - b); }

double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
  // least-squares slope of log e against log h
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST(Grid, RejectsSmallSizes) {
  EXPECT_THROW(build_grid(2, 8, 9, Mode::slab), std::invalid_argument);
  EXPECT_THROW(build_grid(8, 3, 9, Mode::slab), std::invalid_argument);
  EXPECT_THROW(build_grid(8, 8, 4, Mode::slab), std::invalid_argument);
}

TEST(Grid, SigmaSlab) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  const auto& s = g.sigma();
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) {
      EXPECT_EQ(s(i, j, 0), 0.0);
      EXPECT_EQ(s(i, j, 8), 0.0);
      EXPECT_DOUBLE_EQ(s(i, j, 4), 1.0);
      for (int k = 1; k < 8; ++k) EXPECT_GT(s(i, j, k), 0.0);
    }
}

TEST(Grid, SigmaTorus) {
  Grid g = build_grid(8, 8, 8, Mode::torus);
  EXPECT_EQ(min_value(g.sigma()), 1.0);
  EXPECT_EQ(max_abs(g.sigma()), 1.0);
}

TEST(Grid, TangentialSpectral) {
  Grid g = build_grid(16, 16, 9, Mode::slab);
  Field f = g.sample([](double y1, double, double) { return std::sin(2 * pi * y1); });
  Field df = g.sample([](double y1, double, double) { return 2 * pi * std::cos(2 * pi * y1); });
  EXPECT_LE(max_diff(g.d_tan(f, 1), df), 1e-10);
  Field c(g.shape(), 3.7);
  EXPECT_LE(max_abs(g.d_tan(c, 1)), 1e-12);
  EXPECT_LE(max_abs(g.d_tan(c, 2)), 1e-12);
  Field f2 = g.sample([](double, double y2, double) { return std::sin(2 * pi * y2); });
  EXPECT_LE(max_abs(g.d_tan(f2, 1)), 1e-12);
  EXPECT_THROW((void)g.d_tan(f, 3), std::invalid_argument);
}

TEST(Grid, HigherTangentialOrderMatchesComposition) {
  Grid g = build_grid(16, 12, 9, Mode::slab);
  Field f = g.sample([](double y1, double y2, double y3) {
    return std::sin(2 * pi * (y1 + 2 * y2)) * (1 + y3) + std::cos(6 * pi * y1);
  });
  Field d3 = g.d_tan(g.d_tan(g.d_tan(f, 1), 1), 1);
  EXPECT_LE(max_diff(g.d_tan(f, 1, 3), d3), 1e-8);
  Field exact = g.sample([](double y1, double y2, double y3) {
    return -std::pow(2 * pi, 3) * std::cos(2 * pi * (y1 + 2 * y2)) * (1 + y3) + std::pow(6 * pi, 3) * std::sin(6 * pi * y1);
  });
  EXPECT_LE(max_diff(d3, exact) / max_abs(exact), 1e-12);
}

TEST(Grid, TangentialDerivativesCommute) {
  Grid g = build_grid(12, 16, 9, Mode::slab);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  Field f(g.shape());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = u(rng);
  EXPECT_LE(max_diff(g.d_tan(g.d_tan(f, 2), 1), g.d_tan(g.d_tan(f, 1), 2)), 1e-10);
  EXPECT_LE(std::abs(g.integrate(g.d_tan(f, 1))), 1e-12);
  EXPECT_LE(std::abs(g.integrate(g.d_tan(f, 2))), 1e-12);
}

TEST(Grid, NormalExactOnQuartics) {
  Grid g = build_grid(4, 4, 9, Mode::slab);
  Field y = g.coordinate(2);
  EXPECT_LE(max_diff(g.d_nor(y), Field(g.shape(), 1.0)), 1e-10);
  Field y4 = map(y, [](double s) { return s * s * s * s; });
  Field d = map(y, [](double s) { return 4 * s * s * s; });
  EXPECT_LE(max_diff(g.d_nor(y4), d), 1e-10);
}

TEST(Grid, NormalFourthOrder) {
  std::vector<double> hs, errs, errs2;
  for (int n3 : {17, 33, 65}) {
    Grid g = build_grid(4, 4, n3, Mode::slab);
    Field f = g.sample([](double, double, double y3) { return std::sin(pi * y3); });
    Field df = g.sample([](double, double, double y3) { return pi * std::cos(pi * y3); });
    Field d2f = g.sample([](double, double, double y3) { return -pi * pi * std::sin(pi * y3); });
    hs.push_back(g.spacing(2));
    errs.push_back(max_diff(g.d_nor(f), df));
    errs2.push_back(max_diff(g.d_nor(f, 2), d2f));
  }
  EXPECT_GE(fitted_order(hs, errs), 3.5);
  EXPECT_GE(fitted_order(hs, errs2), 3.5);
}

TEST(Grid, TorusNormalSpectral) {
  Grid g = build_grid(8, 8, 16, Mode::torus);
  Field f = g.sample([](double, double, double y3) { return std::cos(pi * y3); });
  Field df = g.sample([](double, double, double y3) { return -pi * std::sin(pi * y3); });
  EXPECT_LE(max_diff(g.d_nor(f), df), 1e-11);
  EXPECT_THROW((void)g.d_wnor(f), std::invalid_argument);
  EXPECT_THROW((void)g.boundary_integrate(f), std::invalid_argument);
}

TEST(Grid, WeightedNormal) {
  Grid g = build_grid(4, 4, 17, Mode::slab);
  const Field& y = g.coordinate(2);
  EXPECT_LE(max_diff(g.d_wnor(y), map(y, [](double s) { return 1 - s * s; })), 1e-12);
  EXPECT_LE(max_abs(g.d_wnor(Field(g.shape(), 2.0))), 1e-12);
  Field y2 = y * y;
  Field expect = map(y, [](double s) { return 2 * s * (1 - s * s); });
  Field got = g.d_wnor(y2);
  EXPECT_LE(max_diff(got, expect), 1e-12);
  // exact zero on the boundary planes for arbitrary input
  Field r = g.sample([](double y1, double y2v, double y3) { return std::exp(y3) * std::sin(2 * pi * y1 + y2v); });
  Field w = g.d_wnor(r);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      EXPECT_EQ(w(i, j, 0), 0.0);
      EXPECT_EQ(w(i, j, 16), 0.0);
    }
}

TEST(Grid, Quadrature) {
  for (Mode m : {Mode::slab, Mode::torus}) {
    Grid g = build_grid(8, 8, m == Mode::slab ? 9 : 8, m);
    EXPECT_NEAR(g.integrate(Field(g.shape(), 1.0)), 2.0, 1e-14);
    EXPECT_NEAR(g.integrate(g.coordinate(2)), 0.0, 1e-14);
  }
  Grid g = build_grid(8, 8, 9, Mode::slab);
  EXPECT_NEAR(g.boundary_integrate(Field(g.shape(), 1.0)), 2.0, 1e-14);
}

TEST(Grid, FilterKeepsLowModes) {
  Grid g = build_grid(12, 12, 5, Mode::slab);
  Field low = g.sample([](double y1, double y2, double) { return std::sin(2 * pi * y1) + std::cos(4 * pi * y2); });
  Field high = g.sample([](double y1, double, double) { return std::cos(10 * pi * y1); });
  EXPECT_LE(max_diff(g.filter_tangential(low), low), 1e-13);
  EXPECT_LE(max_abs(g.filter_tangential(high)), 1e-13);
}
