#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fbmhd/dynamics.hpp"
#include "fbmhd/initdata.hpp"
#include "test_support.hpp"

using namespace fbmhd;
using testkit::fitted_order;
namespace {
constexpr double pi = std::numbers::pi;

Recipe smooth_recipe(double v_amp = 0.1) {
  Recipe r;
  r.name = "smooth";
  r.beta = 0.5;
  r.psi_amp = 0.02;
  r.v_amp = v_amp;
  r.q_amp = 0.1;
  r.kmax = 1;
  r.seed = 8;
  return r;
}

double state_distance(const MaterialState& a, const MaterialState& b) {
  return std::max({max_abs(a.eta - b.eta), max_abs(a.v - b.v), max_abs(a.q - b.q)});
}
}  // namespace

TEST(Dynamics, StaticEquilibriumRhsVanishes) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  Recipe r;
  r.beta = 0.9;
  const RhsBundle out = rhs(make_recipe_state(r, g), g);
  EXPECT_LE(max_abs(out.d_v), 1e-13);
  EXPECT_LE(max_abs(out.d_q), 1e-13);
  EXPECT_LE(max_abs(out.d_eta), 0.0);
  const MaterialState c = make_state(g, make_vector(g.shape()), Field(g.shape(), 0.3), make_vector(g.shape()), Eos{});
  const RhsBundle oc = rhs(c, g);
  EXPECT_LE(max_abs(oc.d_v), 1e-13);
  EXPECT_LE(max_abs(oc.d_q), 1e-13);
}

TEST(Dynamics, PressureGradientForce) {
  Grid g = build_grid(16, 8, 9, Mode::slab);
  const double eps = 0.01;
  const Eos eos{1.2};
  const Field q = g.sample([&](double y1, double, double) { return eps * std::cos(2 * pi * y1); });
  const MaterialState s = make_state(g, make_vector(g.shape()), q, make_vector(g.shape()), eos);
  const RhsBundle out = rhs(s, g);
  const Field R = eos_density(q, eos);
  const Field expect = g.sample([&](double y1, double, double) { return 2 * pi * eps * std::sin(2 * pi * y1); }) * reciprocal(R);
  EXPECT_LE(max_abs(out.d_v[0] - expect), 1e-12);
  EXPECT_LE(max_abs(out.d_v[1]), 1e-13);
  EXPECT_LE(max_abs(out.d_v[2]), 1e-13);
}

TEST(Dynamics, InductionExamples) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  const GeometrySnapshot geo = geometry(identity_map(g), g);
  const VectorField shear = {g.coordinate(2), g.zeros(), g.zeros()};
  const VectorField bz = {g.zeros(), g.zeros(), Field(g.shape(), 1.0)};
  const VectorField out = rhs_induction(bz, shear, geo, g);
  EXPECT_LE(max_abs(out[0] - 1.0), 1e-12);
  EXPECT_LE(max_abs(out[1]), 1e-12);
  EXPECT_LE(max_abs(out[2]), 1e-12);
  EXPECT_LE(max_abs(rhs_induction(bz, make_vector(g.shape()), geo, g)), 0.0);
  EXPECT_LE(max_abs(rhs_induction(make_vector(g.shape()), shear, geo, g)), 0.0);
}

TEST(Dynamics, StaticStepUnchanged) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  Recipe r;
  r.beta = 0.4;
  const MaterialState s = make_recipe_state(r, g);
  const MaterialState n = rk4_step(s, 0.01, g);
  EXPECT_LE(state_distance(s, n), 1e-14);
  EXPECT_DOUBLE_EQ(n.t, 0.01);
  EXPECT_LE(max_abs(n.b0 - s.b0), 0.0);
  EXPECT_LE(max_abs(n.rho0 - s.rho0), 0.0);
}

TEST(Dynamics, UniformTranslationTorus) {
  Grid g = build_grid(8, 8, 8, Mode::torus);
  Recipe r;
  r.name = "uniform";
  r.v_amp = 0.3;
  const MaterialState s = make_recipe_state(r, g);
  const double dt = 0.02;
  const MaterialState n = rk4_step(s, dt, g);
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    EXPECT_LE(max_abs(n.eta[si] - (s.eta[si] + dt * s.v[si])), 1e-15);
  }
  EXPECT_LE(max_abs(n.v - s.v), 1e-15);
  EXPECT_LE(max_abs(n.q - s.q), 1e-15);
}

TEST(Dynamics, CflGuard) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  const MaterialState s = make_recipe_state(smooth_recipe(), g);
  const double limit = max_stable_dt(s, g, 0.25);
  EXPECT_GT(limit, 0.0);
  EXPECT_THROW(rk4_step(s, 2 * limit, g), NumericsError);
  EXPECT_NO_THROW(rk4_step(s, 0.9 * limit, g));
  EXPECT_THROW(rk4_step(s, -1.0, g), NumericsError);
}

TEST(Dynamics, Rk4SelfConvergence) {
  Grid g = build_grid(12, 12, 13, Mode::torus);
  const MaterialState s = make_recipe_state(smooth_recipe(0.2), g);
  const double T = 0.05, dt0 = 0.01;
  const MaterialState ref = evolve(s, T, dt0 / 16, g).state;
  std::vector<double> dts, errs;
  for (double dt : {dt0, dt0 / 2, dt0 / 4}) {
    dts.push_back(dt);
    errs.push_back(state_distance(evolve(s, T, dt, g).state, ref));
  }
  EXPECT_GE(fitted_order(dts, errs), 3.5);
}

TEST(Dynamics, EvolveZeroStepsAndStatic) {
  Grid g = build_grid(8, 8, 9, Mode::slab);
  Recipe r;
  r.beta = 0.3;
  const MaterialState s = make_recipe_state(r, g);
  int calls = 0;
  const EvolveResult z = evolve(s, 0.0, 0.01, g, {}, [&](const StepContext&) { ++calls; });
  EXPECT_EQ(z.steps, 0);
  EXPECT_EQ(calls, 1);
  EXPECT_LE(state_distance(z.state, s), 0.0);
  std::vector<double> jres;
  const EvolveResult e = evolve(s, 1.0, 0.01, g, {}, [&](const StepContext& c) {
    if (c.step > 0) jres.push_back(c.j_transport_residual);
  });
  EXPECT_EQ(e.steps, 100);
  EXPECT_DOUBLE_EQ(e.state.t, 1.0);
  EXPECT_LE(state_distance(e.state, s), 1e-13);
  for (double x : jres) EXPECT_LE(x, 1e-12);
}

TEST(Dynamics, JacobianTransportSecondOrder) {
  Grid g = build_grid(12, 12, 17, Mode::slab);
  const MaterialState s = make_recipe_state(smooth_recipe(0.2), g);
  std::vector<double> dts, errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    double worst = 0.0;
    evolve(s, 0.02, dt, g, {}, [&](const StepContext& c) {
      if (c.step > 0) worst = std::max(worst, c.j_transport_residual);
    });
    dts.push_back(dt);
    errs.push_back(worst);
  }
  EXPECT_GE(fitted_order(dts, errs), 1.8);
}

TEST(Dynamics, FrozenFieldCoEvolution) {
  Grid g = build_grid(12, 12, 17, Mode::slab);
  const MaterialState s = make_recipe_state(smooth_recipe(0.2), g);
  EvolveOptions opt;
  opt.coevolve_b = true;
  std::vector<double> dts, errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const EvolveResult res = evolve(s, 0.02, dt, g, opt);
    const VectorField b = magnetic_field(res.state, geometry(res.state.eta, g));
    dts.push_back(dt);
    errs.push_back(g.l2_norm(*res.b_evolved - b));
  }
  EXPECT_GE(fitted_order(dts, errs), 3.5);
}

TEST(Dynamics, DensityCompatibilityPreserved) {
  // R(q) J = rho0 is invariant for the semi-discrete flow, so the residual is pure time error
  Grid g = build_grid(12, 12, 17, Mode::slab);
  const MaterialState s = make_recipe_state(smooth_recipe(0.2), g);
  std::vector<double> dts, errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const MaterialState e = evolve(s, 0.02, dt, g).state;
    dts.push_back(dt);
    errs.push_back(max_abs(density_compatibility_residual(e, geometry(e.eta, g))));
  }
  EXPECT_GE(fitted_order(dts, errs), 3.5);
}

TEST(Dynamics, FilterOption) {
  Grid g = build_grid(12, 12, 13, Mode::torus);
  const MaterialState s = make_recipe_state(smooth_recipe(0.2), g);
  EvolveOptions opt;
  opt.step.filter = true;
  const MaterialState a = evolve(s, 0.01, 0.005, g, opt).state;
  const MaterialState b = evolve(s, 0.01, 0.005, g).state;
  EXPECT_LE(state_distance(a, b), 1e-3);
  EXPECT_TRUE(all_finite(a.q));
}
