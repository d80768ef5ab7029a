#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fbmhd/errors.hpp"
#include "fbmhd/field.hpp"
#include "fbmhd/grid.hpp"
#include "fbmhd/jet.hpp"
#include "fbmhd/tensor.hpp"

namespace fbmhd {

/// Logarithmic equation of state q = log(R / rho_bar), so R(q) = rho_bar e^q and R'(q) = R.
struct Eos {
  double rho_bar = 1.0;
  double q_limit = 50.0;

  [[nodiscard]] double density(double q) const { return rho_bar * std::exp(q); }
  [[nodiscard]] double pressure(double rho) const { return std::log(rho / rho_bar); }

  /// Q(rho) = int_1^rho p(s) / s^2 ds in closed form.
  [[nodiscard]] double internal_energy(double rho) const {
    const double lb = std::log(rho_bar);
    return (1.0 - lb) * (1.0 - 1.0 / rho) - std::log(rho) / rho;
  }

  /// Smallest A0 >= 1 with every derivative rho^(m)(q) = rho_bar e^q inside [rho_bar / A0, rho_bar A0].
  [[nodiscard]] static double effective_a0(double q_abs_max) { return std::exp(q_abs_max); }
};

inline void check_pressure_range(const Field& q, const Eos& eos) {
  if (!all_finite(q)) throw NumericsError("non-finite pressure");
  const double m = max_abs(q);
  if (m > eos.q_limit) throw NumericsError("pressure outside EOS range: |q| = " + std::to_string(m));
}

/// R = rho_bar e^q nodewise (also R'(q)).
inline Field eos_density(const Field& q, const Eos& eos) {
  check_pressure_range(q, eos);
  return map(q, [&](double x) { return eos.density(x); });
}

inline TimeJet eos_density(const TimeJet& q, const Eos& eos) {
  check_pressure_range(q[0], eos);
  return eos.rho_bar * exponential(q);
}

inline Field eos_pressure(const Field& rho, const Eos& eos) {
  return map(rho, [&](double r) { return eos.pressure(r); });
}

/// Prognostic fields plus the frozen reference data.
struct MaterialState {
  double t = 0.0;
  VectorField eta;
  VectorField v;
  Field q;
  VectorField b0;
  Field rho0;
  Eos eos;
};

/// A state at rest on the identity map with the given pressure and field; rho0 = R(q0).
inline MaterialState make_state(const Grid& g, const VectorField& v0, const Field& q0, const VectorField& b0, const Eos& eos) {
  MaterialState s;
  s.eta = identity_map(g);
  s.v = v0;
  s.q = q0;
  s.b0 = b0;
  s.rho0 = eos_density(q0, eos);
  s.eos = eos;
  return s;
}

/// b_i = J^{-1} b0^l d_l eta_i.
template <class S>
std::array<S, 3> magnetic_field(const Geometry<S>& geo, const VectorField& b0) {
  const S inv_j = reciprocal(geo.J);
  std::array<S, 3> b;
  for (int i = 0; i < 3; ++i) {
    S s = geo.grad(i, 0) * b0[0] + geo.grad(i, 1) * b0[1] + geo.grad(i, 2) * b0[2];
    b[static_cast<std::size_t>(i)] = s * inv_j;
  }
  return b;
}

inline VectorField magnetic_field(const MaterialState& s, const GeometrySnapshot& geo) { return magnetic_field(geo, s.b0); }

/// Q = q + |b|^2 / 2.
template <class S>
S total_pressure(const S& q, const std::array<S, 3>& b) {
  return q + 0.5 * (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
}

inline Field total_pressure(const MaterialState& s, const GeometrySnapshot& geo) {
  return total_pressure(s.q, magnetic_field(s, geo));
}

/// R(q) J - rho0.
inline Field density_compatibility_residual(const MaterialState& s, const GeometrySnapshot& geo) {
  return eos_density(s.q, s.eos) * geo.J - s.rho0;
}

/// b_i Ahat^{li} - b0^l for each l.
inline VectorField flux_identity_residual(const MaterialState& s, const GeometrySnapshot& geo) {
  const VectorField b = magnetic_field(s, geo);
  VectorField out;
  for (int l = 0; l < 3; ++l)
    out[static_cast<std::size_t>(l)] =
        b[0] * geo.Ahat(l, 0) + b[1] * geo.Ahat(l, 1) + b[2] * geo.Ahat(l, 2) - s.b0[static_cast<std::size_t>(l)];
  return out;
}

/// |b_i Ahat^{3i}|_{L^2(Gamma)}.
inline double normal_flux_residual(const MaterialState& s, const GeometrySnapshot& geo, const Grid& g) {
  const VectorField b = magnetic_field(s, geo);
  return g.boundary_l2_norm(b[0] * geo.Ahat(2, 0) + b[1] * geo.Ahat(2, 1) + b[2] * geo.Ahat(2, 2));
}

/// Nodewise -dQ/dN on the boundary planes (N = (0, 0, +-1)), zero elsewhere. Slab mode only.
inline Field taylor_sign_field(const Field& Q, const Grid& g) {
  if (!g.slab()) throw std::invalid_argument("Taylor sign requires slab mode");
  const Field dq = g.d_nor(Q);
  Field out(g.shape());
  const auto& s = g.shape();
  for (int k : {0, s.n3 - 1})
    for (int j = 0; j < s.n2; ++j)
      for (int i = 0; i < s.n1; ++i) out(i, j, k) = -outward_normal(g, k) * dq(i, j, k);
  return out;
}

/// min over Gamma of -dQ/dN.
inline double taylor_sign(const Field& Q, const Grid& g) {
  const Field f = taylor_sign_field(Q, g);
  double m = std::numeric_limits<double>::infinity();
  const auto& s = g.shape();
  for (int k : {0, s.n3 - 1})
    for (int j = 0; j < s.n2; ++j)
      for (int i = 0; i < s.n1; ++i) m = std::min(m, f(i, j, k));
  return m;
}

}  // namespace fbmhd
