#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fbmhd/dynamics.hpp"
#include "fbmhd/errors.hpp"
#include "fbmhd/grid.hpp"
#include "fbmhd/jet.hpp"
#include "fbmhd/state.hpp"
#include "fbmhd/tensor.hpp"

namespace fbmhd {

/// Generator parameters for initial data.
///   static : v0 = 0, b0 = (beta, beta2, 0), q0 = -|b0|^2/2 + q_offset
///   uniform: constant v0 = v_amp (1, 1/2, 1/4), b0 and q0 as for static
///   smooth : band-limited v0 and vector potential; in slab mode
///            q0 = -|b0|^2/2 + taylor sigma (1 + q_amp F) + q_offset, in torus mode q0 = q_amp F + q_offset
struct Recipe {
  std::string name = "static";
  double beta = 0.0;
  double beta2 = 0.0;
  double psi_amp = 0.0;
  double v_amp = 0.0;
  double q_amp = 0.0;
  double taylor = 1.0;
  double q_offset = 0.0;
  int kmax = 1;
  unsigned seed = 1;
  Eos eos;
};

/// Random trigonometric field with tangential wavenumbers |k1| + |k2| <= kmax and a y3
/// factor cos(pi m y3 + phase), m in {0, 1}, so it is smooth and periodic in every mode.
/// Peak value at most `amp`.
inline Field band_limited_field(const Grid& g, double amp, unsigned seed, int kmax) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr double pi = std::numbers::pi;
  struct Term {
    int k1, k2, m3;
    double c, phase, phase3;
  };
  std::vector<Term> terms;
  double total = 0.0;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = -kmax; k2 <= kmax; ++k2) {
      if (std::abs(k1) + std::abs(k2) > kmax) continue;
      Term t{k1, k2, static_cast<int>(rng() % 2), u(rng), pi * u(rng), pi * u(rng)};
      total += std::abs(t.c);
      terms.push_back(t);
    }
  if (total == 0.0) return g.zeros();
  return g.sample([&](double y1, double y2, double y3) {
    double s = 0.0;
    for (const auto& t : terms)
      s += t.c * std::sin(2 * pi * (t.k1 * y1 + t.k2 * y2) + t.phase) * std::cos(pi * t.m3 * y3 + t.phase3);
    return amp * s / total;
  });
}

/// Discrete curl of a vector potential. The grid operators commute, so the discrete
/// divergence of the result vanishes up to round-off.
inline VectorField curl(const VectorField& psi, const Grid& g) {
  return {g.deriv(psi[2], 1) - g.deriv(psi[1], 2), g.deriv(psi[0], 2) - g.deriv(psi[2], 0),
          g.deriv(psi[1], 0) - g.deriv(psi[0], 1)};
}

inline Field divergence(const VectorField& f, const Grid& g) { return g.deriv(f[0], 0) + g.deriv(f[1], 1) + g.deriv(f[2], 2); }

/// b0 = (beta, beta2, 0) + curl psi. In slab mode psi1, psi2 carry the factor sigma, so
/// b0^3 = d1 psi2 - d2 psi1 vanishes on both boundary planes exactly.
inline VectorField make_b0(const Recipe& r, const Grid& g) {
  VectorField b0 = {Field(g.shape(), r.beta), Field(g.shape(), r.beta2), g.zeros()};
  if (r.name == "smooth" && r.psi_amp != 0.0) {
    VectorField psi = {band_limited_field(g, r.psi_amp, r.seed + 11, r.kmax), band_limited_field(g, r.psi_amp, r.seed + 12, r.kmax),
                       band_limited_field(g, r.psi_amp, r.seed + 13, r.kmax)};
    if (g.slab()) {
      psi[0] *= g.sigma();
      psi[1] *= g.sigma();
    }
    b0 = b0 + curl(psi, g);
  }
  if (g.slab()) {
    const double trace = max_abs(boundary_restriction(g, b0[2]));
    if (trace != 0.0) throw ConfigError("recipe gives b0^3 != 0 on the boundary");
  }
  return b0;
}

/// Velocity and pressure of a recipe before any compatibility correction.
inline MaterialState make_recipe_state(const Recipe& r, const Grid& g) {
  const VectorField b0 = make_b0(r, g);
  const Field half_b2 = 0.5 * dot(b0, b0);
  VectorField v0 = make_vector(g.shape());
  Field q0 = -1.0 * half_b2;
  if (r.name == "static") {
  } else if (r.name == "uniform") {
    v0 = {Field(g.shape(), r.v_amp), Field(g.shape(), 0.5 * r.v_amp), Field(g.shape(), 0.25 * r.v_amp)};
  } else if (r.name == "smooth") {
    v0 = {band_limited_field(g, r.v_amp, r.seed + 1, r.kmax), band_limited_field(g, r.v_amp, r.seed + 2, r.kmax),
          band_limited_field(g, r.v_amp, r.seed + 3, r.kmax)};
    const Field pert = band_limited_field(g, r.q_amp, r.seed + 4, r.kmax);
    if (g.slab()) {
      q0 += r.taylor * (g.sigma() * (1.0 + pert));
    } else {
      q0 = pert;
    }
  } else {
    throw ConfigError("unknown recipe '" + r.name + "'");
  }
  q0 += r.q_offset;
  return make_state(g, v0, q0, b0, r.eos);
}

/// Time derivatives f_(j) = d_t^j f at the state's time, j = 0..order, from the
/// formal power series of the semi-discrete system.
struct Jet {
  int order = 0;
  VectorJet xi;  // eta - y
  VectorJet v;
  TimeJet q;
  VectorJet b;
  TimeJet Q;

  [[nodiscard]] Field eta(int i, int j, const Grid& g) const {
    Field f = xi[static_cast<std::size_t>(i)].derivative(j);
    if (j == 0) f += g.coordinate(i);
    return f;
  }
  [[nodiscard]] VectorField eta(int j, const Grid& g) const { return {eta(0, j, g), eta(1, j, g), eta(2, j, g)}; }
  [[nodiscard]] VectorField velocity(int j) const { return {v[0].derivative(j), v[1].derivative(j), v[2].derivative(j)}; }
  [[nodiscard]] VectorField field(int j) const { return {b[0].derivative(j), b[1].derivative(j), b[2].derivative(j)}; }
  [[nodiscard]] Field pressure(int j) const { return q.derivative(j); }
  [[nodiscard]] Field total_pressure(int j) const { return Q.derivative(j); }
};

inline constexpr int max_jet_order = 8;

/// Taylor coefficients are generated one order at a time: coefficient n of the right-hand
/// side only involves coefficients <= n of the unknowns, so
///   xi[n+1] = v[n]/(n+1),  v[n+1] = (d_t v)[n]/(n+1),  q[n+1] = (d_t q)[n]/(n+1).
inline Jet jet_recursion(const MaterialState& s, int order, const Grid& g, double jacobian_floor = default_jacobian_floor) {
  if (order < 0 || order > max_jet_order) throw ConfigError("jet order must be in [0, 8]");
  const int depth = order + 1;
  const VectorField xi0 = displacement(s.eta, g);
  Jet jet;
  jet.order = order;
  for (int i = 0; i < 3; ++i) {
    jet.xi[static_cast<std::size_t>(i)] = TimeJet(xi0[static_cast<std::size_t>(i)], depth);
    jet.v[static_cast<std::size_t>(i)] = TimeJet(s.v[static_cast<std::size_t>(i)], depth);
  }
  jet.q = TimeJet(s.q, depth);
  for (int n = 0; n < order; ++n) {
    VectorJet xt, vt;
    for (std::size_t i = 0; i < 3; ++i) {
      xt[i] = jet.xi[i].truncated(n + 1);
      vt[i] = jet.v[i].truncated(n + 1);
    }
    const RhsT<TimeJet> r = evaluate_rhs(g, xt, vt, jet.q.truncated(n + 1), s.b0, s.rho0, s.eos, jacobian_floor);
    const double inv = 1.0 / (n + 1);
    for (std::size_t i = 0; i < 3; ++i) {
      jet.xi[i][n + 1] = inv * jet.v[i][n];
      jet.v[i][n + 1] = inv * r.d_v[i][n];
    }
    jet.q[n + 1] = inv * r.d_q[n];
    if (!all_finite(jet.v[0][n + 1]) || !all_finite(jet.v[1][n + 1]) || !all_finite(jet.v[2][n + 1]) || !all_finite(jet.q[n + 1]))
      throw NumericsError("non-finite jet coefficient at order " + std::to_string(n + 1));
  }
  const Geometry<TimeJet> geo = cofactor(deformation_gradient_of_displacement(g, jet.xi), jacobian_floor);
  jet.b = magnetic_field(geo, s.b0);
  jet.Q = fbmhd::total_pressure(jet.q, jet.b);
  return jet;
}

/// |Q_(j)|_{L^2(Gamma)} for j = 0..order.
inline std::vector<double> compatibility_residuals(const Jet& jet, const Grid& g) {
  std::vector<double> out;
  for (int j = 0; j <= jet.order; ++j) out.push_back(g.boundary_l2_norm(jet.total_pressure(j)));
  return out;
}

namespace detail {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Profile p_d(t) with p^(m)(0) = delta_md for m <= 3 that vanishes to sixth order at t = -2:
/// (t^d / d!) * [Taylor polynomial of (1 + t/2)^-6 to degree 3 - d] * (1 + t/2)^6.
inline double boundary_profile(int d, double t) {
  double fact = 1.0;
  for (int i = 2; i <= d; ++i) fact *= i;
  double taylor = 0.0;
  for (int m = 0; m <= 3 - d; ++m) taylor += (m % 2 ? -1.0 : 1.0) * binomial(5 + m, m) * std::pow(0.5 * t, m);
  return std::pow(t, d) / fact * taylor * std::pow(1.0 + 0.5 * t, 6);
}

/// Extends boundary data phi_top, phi_bottom (fields whose boundary-plane values are used)
/// into the slab with normal profile of order d: d3^d of the result equals phi on each plane.
inline Field extend_from_boundary(const Field& phi, int d, const Grid& g) {
  const auto& s = g.shape();
  Field out(s);
  for (int k = 0; k < s.n3; ++k) {
    const double y = g.node_coordinate(2, k);
    const double top = boundary_profile(d, y - 1.0);
    const double bottom = (d % 2 ? -1.0 : 1.0) * boundary_profile(d, -(y + 1.0));
    for (int j = 0; j < s.n2; ++j)
      for (int i = 0; i < s.n1; ++i) out(i, j, k) = top * phi(i, j, s.n3 - 1) + bottom * phi(i, j, 0);
  }
  return out;
}

}  // namespace detail

struct ProjectionOptions {
  double tolerance = 1e-10;
  int max_iterations = 60;
  double taylor_c0 = 0.1;
};

struct ProjectionReport {
  int iterations = 0;
  double taylor_added = 0.0;
  std::vector<double> residuals;
};

/// Corrects a recipe state so |Q_(j)|_{L^2(Gamma)} <= tolerance for j <= order (order <= 3).
///
/// Fixed-point loop on boundary data with separable corrections (boundary field) x (normal profile):
///   j = 0: q0 value,     leading response of Q_(0) to the correction: 1
///   j = 1: d3 v0^3,      response -(1 + |b0|^2)
///   j = 2: d3^2 q0,      response (1 + |b0|^2) / rho0
///   j = 3: d3^3 v0^3,    response -(1 + |b0|^2)^2 / rho0
/// Each normal profile has vanishing lower-order derivatives on the plane it corrects and
/// vanishes to high order on the opposite plane. Before the loop, a multiple of sigma is
/// added to q0 if needed so that -dQ0/dN >= c0 on both planes.
inline MaterialState project_compatible(const MaterialState& initial, int order, const Grid& g, const ProjectionOptions& opt = {},
                                        ProjectionReport* report = nullptr) {
  if (!g.slab()) throw ConfigError("compatibility projection requires slab mode");
  if (order < 0 || order > 3) throw ConfigError("supported compatibility order is 0..3");
  MaterialState s = initial;
  s.eta = identity_map(g);
  s.rho0 = eos_density(s.q, s.eos);
  ProjectionReport rep;

  const Field b2 = dot(s.b0, s.b0);
  const double ts = taylor_sign(total_pressure(s, geometry(s.eta, g)), g);
  if (ts < opt.taylor_c0) {
    rep.taylor_added = 0.5 * (opt.taylor_c0 - ts) + 0.5 * opt.taylor_c0;
    s.q += rep.taylor_added * g.sigma();
    s.rho0 = eos_density(s.q, s.eos);
  }

  for (int it = 0;; ++it) {
    const Jet jet = jet_recursion(s, order, g);
    rep.residuals = compatibility_residuals(jet, g);
    rep.iterations = it;
    double worst = 0.0;
    for (double r : rep.residuals) worst = std::max(worst, r);
    if (worst <= opt.tolerance) break;
    if (it >= opt.max_iterations)
      throw NumericsError("compatibility projection did not converge: residual " + std::to_string(worst));

    const Field one_b2 = 1.0 + b2;
    for (int j = 0; j <= order; ++j) {
      const Field r = jet.total_pressure(j);
      switch (j) {
        case 0:
          s.q -= detail::extend_from_boundary(r, 0, g);
          break;
        case 1:
          s.v[2] += detail::extend_from_boundary(r * reciprocal(one_b2), 1, g);
          break;
        case 2:
          s.q -= detail::extend_from_boundary(r * s.rho0 * reciprocal(one_b2), 2, g);
          break;
        case 3:
          s.v[2] += detail::extend_from_boundary(r * s.rho0 * reciprocal(one_b2 * one_b2), 3, g);
          break;
        default:
          break;
      }
    }
    s.rho0 = eos_density(s.q, s.eos);
  }
  if (report) *report = rep;
  return s;
}

}  // namespace fbmhd
