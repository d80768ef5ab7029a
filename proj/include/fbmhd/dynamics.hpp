#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fbmhd/errors.hpp"
#include "fbmhd/grid.hpp"
#include "fbmhd/jet.hpp"
#include "fbmhd/state.hpp"
#include "fbmhd/tensor.hpp"

namespace fbmhd {

template <class S>
struct RhsT {
  std::array<S, 3> d_eta;
  std::array<S, 3> d_v;
  S d_q;
};

using RhsBundle = RhsT<Field>;

/// Right-hand side of the Lagrangian system written once for fields and time jets.
///   d_t eta = v
///   R d_t v = J^{-1}(b0.d)(J^{-1}(b0.d)eta) - grad_A Q,   Q = q + |b|^2/2
///   d_t q   = -rho0 / (J R'(q)) div_A v,                 R'(q) = R for the log EOS
/// `xi` is the displacement eta - y.
template <class S>
RhsT<S> evaluate_rhs(const Grid& g, const std::array<S, 3>& xi, const std::array<S, 3>& v, const S& q,
                     const VectorField& b0, const Field& rho0, const Eos& eos, double jacobian_floor) {
  const Geometry<S> geo = cofactor(deformation_gradient_of_displacement(g, xi), jacobian_floor);
  const S inv_j = reciprocal(geo.J);
  const std::array<S, 3> b = magnetic_field(geo, b0);
  const S Q = total_pressure(q, b);
  const std::array<S, 3> grad_q = cov_grad(g, geo.A, Q);
  const S inv_r = reciprocal(eos_density(q, eos));

  RhsT<S> out;
  out.d_eta = v;
  for (int i = 0; i < 3; ++i) {
    const auto db = gradient(g, b[static_cast<std::size_t>(i)]);
    S tension = db[0] * b0[0] + db[1] * b0[1] + db[2] * b0[2];
    out.d_v[static_cast<std::size_t>(i)] = (tension * inv_j - grad_q[static_cast<std::size_t>(i)]) * inv_r;
  }
  out.d_q = -1.0 * (cov_div(g, geo.A, v) * inv_j * inv_r * rho0);
  return out;
}

inline RhsBundle rhs(const MaterialState& s, const Grid& g, double jacobian_floor = default_jacobian_floor) {
  RhsBundle r = evaluate_rhs(g, displacement(s.eta, g), s.v, s.q, s.b0, s.rho0, s.eos, jacobian_floor);
  if (!all_finite(r.d_v) || !all_finite(r.d_q)) throw NumericsError("non-finite right-hand side");
  return r;
}

/// Lagrangian induction right-hand side (b.grad_A) v - b div_A v.
inline VectorField rhs_induction(const VectorField& b, const VectorField& v, const GeometrySnapshot& geo, const Grid& g) {
  const Field div = cov_div(g, geo.A, v);
  VectorField out;
  for (int i = 0; i < 3; ++i) {
    const VectorField gv = cov_grad(g, geo.A, v[static_cast<std::size_t>(i)]);
    out[static_cast<std::size_t>(i)] = dot(b, gv) - b[static_cast<std::size_t>(i)] * div;
  }
  return out;
}

struct StepOptions {
  double cfl = 0.25;
  double jacobian_floor = default_jacobian_floor;
  bool filter = false;
};

/// Largest |v| + sqrt(1/R) + |b| / sqrt(R) over the grid.
inline double max_wave_speed(const MaterialState& s, const GeometrySnapshot& geo) {
  const Field R = eos_density(s.q, s.eos);
  const VectorField b = magnetic_field(s, geo);
  double c = 0.0;
  for (std::size_t k = 0; k < R.size(); ++k) {
    const double vm = std::sqrt(s.v[0][k] * s.v[0][k] + s.v[1][k] * s.v[1][k] + s.v[2][k] * s.v[2][k]);
    const double bm = std::sqrt(b[0][k] * b[0][k] + b[1][k] * b[1][k] + b[2][k] * b[2][k]);
    c = std::max(c, vm + std::sqrt(1.0 / R[k]) + bm / std::sqrt(R[k]));
  }
  return c;
}

inline double max_stable_dt(const MaterialState& s, const Grid& g, double cfl) {
  return cfl * g.min_spacing() / max_wave_speed(s, geometry(s.eta, g, 0.0));
}

namespace detail {

/// Prognostic variables flattened for the stage arithmetic: eta, v, q and optionally a co-evolved b.
struct Stage {
  std::vector<Field> f;
};

inline Stage pack(const MaterialState& s, const VectorField* b) {
  Stage st;
  st.f = {s.eta[0], s.eta[1], s.eta[2], s.v[0], s.v[1], s.v[2], s.q};
  if (b) st.f.insert(st.f.end(), b->begin(), b->end());
  return st;
}

inline void unpack(const Stage& st, MaterialState& s, VectorField* b) {
  for (int i = 0; i < 3; ++i) {
    s.eta[static_cast<std::size_t>(i)] = st.f[static_cast<std::size_t>(i)];
    s.v[static_cast<std::size_t>(i)] = st.f[static_cast<std::size_t>(3 + i)];
  }
  s.q = st.f[6];
  if (b)
    for (int i = 0; i < 3; ++i) (*b)[static_cast<std::size_t>(i)] = st.f[static_cast<std::size_t>(7 + i)];
}

inline Stage axpy(const Stage& x, double a, const Stage& y) {
  Stage out = x;
  for (std::size_t k = 0; k < out.f.size(); ++k) out.f[k] += a * y.f[k];
  return out;
}

inline Stage derivatives(const Stage& st, const MaterialState& frozen, const Grid& g, double floor) {
  MaterialState s = frozen;
  const bool with_b = st.f.size() > 7;
  VectorField b;
  unpack(st, s, with_b ? &b : nullptr);
  RhsBundle r = rhs(s, g, floor);
  Stage out;
  out.f = {r.d_eta[0], r.d_eta[1], r.d_eta[2], r.d_v[0], r.d_v[1], r.d_v[2], r.d_q};
  if (with_b) {
    const VectorField db = rhs_induction(b, s.v, geometry(s.eta, g, floor), g);
    out.f.insert(out.f.end(), db.begin(), db.end());
  }
  return out;
}

}  // namespace detail

/// One classical RK4 step; b0, rho0 untouched. `b` (if given) is advanced by the induction equation.
inline MaterialState rk4_step(const MaterialState& s, double dt, const Grid& g, const StepOptions& opt = {},
                              VectorField* b = nullptr) {
  if (!(dt > 0.0)) throw NumericsError("time step must be positive");
  const double limit = max_stable_dt(s, g, opt.cfl);
  if (dt > limit * (1.0 + 1e-12))
    throw NumericsError("CFL violation: dt = " + std::to_string(dt) + " > " + std::to_string(limit));

  const detail::Stage y0 = detail::pack(s, b);
  const detail::Stage k1 = detail::derivatives(y0, s, g, opt.jacobian_floor);
  const detail::Stage k2 = detail::derivatives(detail::axpy(y0, 0.5 * dt, k1), s, g, opt.jacobian_floor);
  const detail::Stage k3 = detail::derivatives(detail::axpy(y0, 0.5 * dt, k2), s, g, opt.jacobian_floor);
  const detail::Stage k4 = detail::derivatives(detail::axpy(y0, dt, k3), s, g, opt.jacobian_floor);
  detail::Stage y1 = y0;
  for (std::size_t k = 0; k < y1.f.size(); ++k)
    y1.f[k] += (dt / 6.0) * (k1.f[k] + 2.0 * k2.f[k] + 2.0 * k3.f[k] + k4.f[k]);

  MaterialState out = s;
  detail::unpack(y1, out, b);
  out.t = s.t + dt;
  if (opt.filter) {
    const VectorField xi = displacement(out.eta, g);
    for (int i = 0; i < 3; ++i) {
      out.eta[static_cast<std::size_t>(i)] = g.coordinate(i) + g.filter_tangential(xi[static_cast<std::size_t>(i)]);
      out.v[static_cast<std::size_t>(i)] = g.filter_tangential(out.v[static_cast<std::size_t>(i)]);
    }
    out.q = g.filter_tangential(out.q);
  }
  if (!all_finite(out.eta) || !all_finite(out.v) || !all_finite(out.q)) throw NumericsError("non-finite state after step");
  return out;
}

/// What a per-step hook sees. Step 0 is the initial state.
struct StepContext {
  int step = 0;
  double dt = 0.0;
  const MaterialState* state = nullptr;
  const GeometrySnapshot* geometry = nullptr;
  const VectorField* b_evolved = nullptr;
  /// max |(J(t+dt) - J(t))/dt - (J div_A v averaged over both ends)|, NaN at step 0.
  double j_transport_residual = std::numeric_limits<double>::quiet_NaN();
};

using StepHook = std::function<void(const StepContext&)>;

struct EvolveOptions {
  StepOptions step;
  bool coevolve_b = false;
};

struct EvolveResult {
  MaterialState state;
  std::optional<VectorField> b_evolved;
  int steps = 0;
  double dt = 0.0;
};

/// Steps from s.t to t_end with a uniform step no larger than dt_max; hooks fire after every step.
inline EvolveResult evolve(const MaterialState& s, double t_end, double dt_max, const Grid& g, const EvolveOptions& opt = {},
                           const StepHook& hook = {}) {
  EvolveResult res;
  res.state = s;
  const double span = t_end - s.t;
  if (span < 0.0) throw NumericsError("t_end precedes the current time");
  const int n = span == 0.0 ? 0 : static_cast<int>(std::ceil(span / dt_max - 1e-9));
  res.steps = n;
  res.dt = n > 0 ? span / n : 0.0;
  if (opt.coevolve_b) res.b_evolved = magnetic_field(s, geometry(s.eta, g, opt.step.jacobian_floor));

  GeometrySnapshot geo = geometry(res.state.eta, g, opt.step.jacobian_floor);
  auto j_rate = [&](const MaterialState& st, const GeometrySnapshot& gs) { return gs.J * cov_div(g, gs.A, st.v); };
  Field rate = j_rate(res.state, geo);
  if (hook) {
    StepContext ctx;
    ctx.state = &res.state;
    ctx.geometry = &geo;
    ctx.b_evolved = res.b_evolved ? &*res.b_evolved : nullptr;
    hook(ctx);
  }
  for (int k = 1; k <= n; ++k) {
    MaterialState next = rk4_step(res.state, res.dt, g, opt.step, res.b_evolved ? &*res.b_evolved : nullptr);
    if (k == n) next.t = t_end;
    GeometrySnapshot next_geo = geometry(next.eta, g, opt.step.jacobian_floor);
    Field next_rate = j_rate(next, next_geo);
    const double jres = max_abs((1.0 / res.dt) * (next_geo.J - geo.J) - 0.5 * (rate + next_rate));
    res.state = std::move(next);
    geo = std::move(next_geo);
    rate = std::move(next_rate);
    if (hook) {
      StepContext ctx;
      ctx.step = k;
      ctx.dt = res.dt;
      ctx.state = &res.state;
      ctx.geometry = &geo;
      ctx.b_evolved = res.b_evolved ? &*res.b_evolved : nullptr;
      ctx.j_transport_residual = jres;
      hook(ctx);
    }
  }
  return res;
}

}  // namespace fbmhd
