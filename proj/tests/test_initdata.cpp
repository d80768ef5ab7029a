#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "fbmhd/initdata.hpp"
#include "test_support.hpp"

using namespace fbmhd;
namespace {
constexpr double pi = std::numbers::pi;

Recipe smooth_recipe() {
  Recipe r;
  r.name = "smooth";
  r.beta = 0.5;
  r.psi_amp = 0.02;
  r.v_amp = 0.05;
  r.q_amp = 0.1;
  r.taylor = 1.0;
  r.kmax = 1;
  r.seed = 4;
  return r;
}
}  // namespace

TEST(Initdata, UniformAndZeroField) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  Recipe r;
  r.beta = 0.8;
  const VectorField b0 = make_b0(r, g);
  EXPECT_LE(max_abs(b0[0] - 0.8), 0.0);
  EXPECT_EQ(max_abs(b0[1]), 0.0);
  EXPECT_EQ(max_abs(b0[2]), 0.0);
  EXPECT_EQ(max_abs(divergence(b0, g)), 0.0);
  Recipe z;
  EXPECT_EQ(max_abs(make_b0(z, g)), 0.0);
}

TEST(Initdata, CurlOfScalarStream) {
  Grid g = build_grid(16, 16, 9, Mode::slab);
  auto gfun = [](double y1, double y2, double) { return std::sin(2 * pi * y1) * std::cos(4 * pi * y2); };
  VectorField psi = {g.zeros(), g.zeros(), g.sample(gfun)};
  const VectorField b0 = curl(psi, g);
  // analytic (d2 g, -d1 g, 0)
  Field d2g = g.sample([](double y1, double y2, double) { return -4 * pi * std::sin(2 * pi * y1) * std::sin(4 * pi * y2); });
  Field d1g = g.sample([](double y1, double y2, double) { return 2 * pi * std::cos(2 * pi * y1) * std::cos(4 * pi * y2); });
  EXPECT_LE(max_abs(b0[0] - d2g), 1e-11);
  EXPECT_LE(max_abs(b0[1] + d1g), 1e-11);
  EXPECT_EQ(max_abs(b0[2]), 0.0);
  EXPECT_LE(max_abs(divergence(b0, g)), 1e-10);
}

TEST(Initdata, SmoothFieldConstraints) {
  Grid g = build_grid(12, 12, 17, Mode::slab);
  const VectorField b0 = make_b0(smooth_recipe(), g);
  EXPECT_GT(max_abs(b0[2]), 1e-3);
  EXPECT_EQ(max_abs(boundary_restriction(g, b0[2])), 0.0);
  EXPECT_LE(max_abs(divergence(b0, g)), 1e-12);
}

TEST(Initdata, JetOfStaticEquilibrium) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  Recipe r;
  r.beta = 0.6;
  const MaterialState s = make_recipe_state(r, g);
  const Jet jet = jet_recursion(s, 4, g);
  for (int j = 1; j <= 4; ++j) {
    EXPECT_LE(max_abs(jet.velocity(j)), 1e-13);
    EXPECT_LE(max_abs(jet.pressure(j)), 1e-13);
    EXPECT_LE(max_abs(jet.total_pressure(j)), 1e-13);
  }
  for (double x : compatibility_residuals(jet, g)) EXPECT_LE(x, 1e-13);
}

TEST(Initdata, FirstOrderJetAgainstClosedForm) {
  Grid g = build_grid(12, 12, 17, Mode::slab);
  const MaterialState s = make_recipe_state(smooth_recipe(), g);
  const Jet jet = jet_recursion(s, 1, g);
  // eta = Id, J = 1, A = I: v_(1) = ((b0.d) b0 - grad Q0) / rho0, q_(1) = -div v0 (rho0 = R)
  const Field Q0 = s.q + 0.5 * dot(s.b0, s.b0);
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    Field tension = s.b0[0] * g.deriv(s.b0[si], 0) + s.b0[1] * g.deriv(s.b0[si], 1) + s.b0[2] * g.deriv(s.b0[si], 2);
    Field expect = (tension - g.deriv(Q0, i)) * reciprocal(s.rho0);
    EXPECT_LE(max_abs(jet.velocity(1)[si] - expect), 1e-12);
  }
  EXPECT_LE(max_abs(jet.pressure(1) + divergence(s.v, g)), 1e-12);
  // consistent with the right-hand side evaluated on fields
  const RhsBundle r = rhs(s, g);
  EXPECT_LE(max_abs(jet.velocity(1) - r.d_v), 1e-13);
  EXPECT_LE(max_abs(jet.pressure(1) - r.d_q), 1e-13);
  EXPECT_LE(max_abs(jet.eta(1, g) - s.v), 0.0);
}

TEST(Initdata, JetMatchesMicroStepDifference) {
  Grid g = build_grid(12, 12, 17, Mode::slab);
  const MaterialState s = make_recipe_state(smooth_recipe(), g);
  const Jet jet = jet_recursion(s, 2, g);
  std::vector<double> dts, errs, errs_q;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    const MaterialState a = rk4_step(rk4_step(s, dt / 2, g), dt / 2, g);
    dts.push_back(dt);
    errs.push_back(max_abs((1.0 / dt) * (a.v - s.v) - jet.velocity(1)));
    errs_q.push_back(max_abs((1.0 / dt) * (a.q - s.q) - jet.pressure(1)));
    // first-order error term is dt/2 v_(2)
    EXPECT_NEAR(errs.back() / (0.5 * dt * max_abs(jet.velocity(2))), 1.0, 0.1);
  }
  EXPECT_NEAR(testkit::fitted_order(dts, errs), 1.0, 0.1);
  EXPECT_NEAR(testkit::fitted_order(dts, errs_q), 1.0, 0.1);
}

TEST(Initdata, JetIsExactTaylorSeriesOfSemiDiscreteFlow) {
  // the order-4 Taylor polynomial predicts a small step to O(dt^5)
  Grid g = build_grid(8, 8, 13, Mode::torus);
  Recipe r = smooth_recipe();
  const MaterialState s = make_recipe_state(r, g);
  const Jet jet = jet_recursion(s, 4, g);
  std::vector<double> dts, errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    MaterialState a = s;
    for (int k = 0; k < 8; ++k) a = rk4_step(a, dt / 8, g);
    Field pred = s.q;
    double c = 1.0;
    for (int n = 1; n <= 4; ++n) {
      c *= dt / n;
      pred += c * jet.pressure(n);
    }
    dts.push_back(dt);
    errs.push_back(max_abs(a.q - pred));
  }
  EXPECT_GE(testkit::fitted_order(dts, errs), 4.5);
}

TEST(Initdata, IncompatibleTraceMagnitude) {
  Grid g = build_grid(16, 16, 17, Mode::slab);
  Recipe r = smooth_recipe();
  r.q_offset = 0.03;
  const MaterialState s = make_recipe_state(r, g);
  const auto res = compatibility_residuals(jet_recursion(s, 0, g), g);
  EXPECT_NEAR(res[0], 0.03 * std::sqrt(2.0), 1e-14);
}

TEST(Initdata, TaylorProfileRecipe) {
  // q0 = c (1 - y3^2), b0 = 0, v0 = 0: Q0 vanishes on Gamma and -dQ0/dN = 2c
  Grid g = build_grid(8, 8, 9, Mode::slab);
  Recipe r;
  r.name = "smooth";
  r.taylor = 1.0;
  const MaterialState s = make_recipe_state(r, g);
  const Field Q = total_pressure(s, geometry(s.eta, g));
  EXPECT_LE(g.boundary_l2_norm(Q), 1e-15);
  EXPECT_NEAR(taylor_sign(Q, g), 2.0, 1e-12);
  ProjectionReport rep;
  // orders 0 and 1 hold exactly for this recipe (v0 = 0 gives Q_(1) = 0)
  const MaterialState p = project_compatible(s, 1, g, {}, &rep);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_EQ(rep.taylor_added, 0.0);
  EXPECT_LE(max_abs(p.q - s.q), 0.0);
}

TEST(Initdata, BoundaryProfiles) {
  // derivatives at t = 0 by Richardson-extrapolated central differences of the closed form
  for (int d = 0; d <= 3; ++d) {
    auto p = [&](double t) { return detail::boundary_profile(d, t); };
    auto diff = [&](int m, double h) {
      switch (m) {
        case 0: return p(0);
        case 1: return (p(h) - p(-h)) / (2 * h);
        case 2: return (p(h) - 2 * p(0) + p(-h)) / (h * h);
        default: return (p(2 * h) - 2 * p(h) + 2 * p(-h) - p(-2 * h)) / (2 * h * h * h);
      }
    };
    for (int m = 0; m <= 3; ++m) {
      const double h = 0.02;
      const double extrapolated = (4.0 * diff(m, h / 2) - diff(m, h)) / 3.0;
      EXPECT_NEAR(extrapolated, d == m ? 1.0 : 0.0, 1e-4) << d << " " << m;
    }
    EXPECT_NEAR(detail::boundary_profile(d, -2.0), 0.0, 1e-15);
  }
}

TEST(Initdata, ProjectFirstOrder) {
  Grid g = build_grid(16, 16, 25, Mode::slab);
  Recipe r = smooth_recipe();
  r.q_offset = 0.01;
  const MaterialState s = make_recipe_state(r, g);
  const MaterialState p = project_compatible(s, 1, g);
  const auto res = compatibility_residuals(jet_recursion(p, 1, g), g);
  EXPECT_LE(res[0], 1e-8);
  EXPECT_LE(res[1], 1e-8);
}

TEST(Initdata, ProjectThirdOrder) {
  Grid g = build_grid(24, 24, 33, Mode::slab);
  const auto t0 = std::chrono::steady_clock::now();
  ProjectionReport rep;
  const MaterialState p = project_compatible(make_recipe_state(smooth_recipe(), g), 3, g, {}, &rep);
  const auto res = compatibility_residuals(jet_recursion(p, 3, g), g);
  for (double x : res) EXPECT_LE(x, 1e-8);
  EXPECT_GE(taylor_sign(total_pressure(p, geometry(p.eta, g)), g), 0.1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("third-order projection: %d iterations, %.2f s\n", rep.iterations, secs);
}

TEST(Initdata, TaylorSignEnforced) {
  Grid g = build_grid(12, 12, 17, Mode::slab);
  Recipe r = smooth_recipe();
  r.taylor = 0.0;
  ProjectionReport rep;
  const MaterialState p = project_compatible(make_recipe_state(r, g), 0, g, {}, &rep);
  EXPECT_GT(rep.taylor_added, 0.0);
  EXPECT_GE(taylor_sign(total_pressure(p, geometry(p.eta, g)), g), 0.1);
}

TEST(Initdata, RejectsUnsupported) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  Recipe r;
  r.name = "nonsense";
  EXPECT_THROW(make_recipe_state(r, g), ConfigError);
  Recipe ok;
  EXPECT_THROW(project_compatible(make_recipe_state(ok, g), 4, g), ConfigError);
  EXPECT_THROW(jet_recursion(make_recipe_state(ok, g), 9, g), ConfigError);
}
