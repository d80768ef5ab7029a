#pragma once

#include <string>

#include "fbmhd/errors.hpp"
#include "fbmhd/field.hpp"
#include "fbmhd/grid.hpp"
#include "fbmhd/jet.hpp"

namespace fbmhd {

/// Flow-map geometry at one time.
/// grad(i, l) = d_l eta_i, A(l, i) = A^{li} = dy^l/dx^i, Ahat = J A (cofactor rows).
template <class S>
struct Geometry {
  Mat3<S> grad;
  Mat3<S> Ahat;
  Mat3<S> A;
  S J;
};

using GeometrySnapshot = Geometry<Field>;

inline constexpr double default_jacobian_floor = 0.1;

/// eta - y. Periodic directions only admit the displacement, so derivatives of eta are
/// always taken through it.
inline VectorField displacement(const VectorField& eta, const Grid& g) {
  return {eta[0] - g.coordinate(0), eta[1] - g.coordinate(1), eta[2] - g.coordinate(2)};
}

inline VectorField identity_map(const Grid& g) { return {g.coordinate(0), g.coordinate(1), g.coordinate(2)}; }

/// Gradient d_l f for l = 0, 1, 2.
template <class S>
std::array<S, 3> gradient(const Grid& g, const S& f) {
  return {derivative(g, f, 0), derivative(g, f, 1), derivative(g, f, 2)};
}

/// d_l eta_i from the displacement xi = eta - y.
template <class S>
Mat3<S> deformation_gradient_of_displacement(const Grid& g, const std::array<S, 3>& xi) {
  Mat3<S> grad;
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l) {
      grad(i, l) = derivative(g, xi[static_cast<std::size_t>(i)], l);
      if (i == l) grad(i, l) += 1.0;
    }
  return grad;
}

inline Mat3Field deformation_gradient(const VectorField& eta, const Grid& g) {
  return deformation_gradient_of_displacement(g, displacement(eta, g));
}

/// Cofactor rows Ahat^{li} = eps^{ijk} d_{l+1} eta_j d_{l+2} eta_k (indices cyclic),
/// J = Ahat^{3i} d_3 eta_i, A = Ahat / J. No floor check.
template <class S>
Geometry<S> cofactor_unchecked(const Mat3<S>& grad) {
  Geometry<S> geo;
  geo.grad = grad;
  for (int l = 0; l < 3; ++l) {
    const int a = (l + 1) % 3, b = (l + 2) % 3;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      geo.Ahat(l, i) = grad(j, a) * grad(k, b) - grad(k, a) * grad(j, b);
    }
  }
  geo.J = geo.Ahat(2, 0) * grad(0, 2) + geo.Ahat(2, 1) * grad(1, 2) + geo.Ahat(2, 2) * grad(2, 2);
  const S inv_j = reciprocal(geo.J);
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i) geo.A(l, i) = geo.Ahat(l, i) * inv_j;
  return geo;
}

template <class S>
void check_jacobian(const S& J, double floor) {
  const Field& j0 = value_of(J);
  if (!all_finite(j0)) throw NumericsError("non-finite Jacobian");
  const double jmin = min_value(j0);
  if (jmin <= 0.0 || jmin < floor)
    throw NumericsError("Jacobian floor violated: min J = " + std::to_string(jmin) + " < " + std::to_string(floor));
}

template <class S>
Geometry<S> cofactor(const Mat3<S>& grad, double floor = default_jacobian_floor) {
  Geometry<S> geo = cofactor_unchecked(grad);
  check_jacobian(geo.J, floor);
  return geo;
}

inline GeometrySnapshot geometry(const VectorField& eta, const Grid& g, double floor = default_jacobian_floor) {
  return cofactor(deformation_gradient(eta, g), floor);
}

/// grad_A^i f = A^{li} d_l f.
template <class S>
std::array<S, 3> cov_grad(const Grid& g, const Mat3<S>& A, const S& f) {
  const auto df = gradient(g, f);
  std::array<S, 3> out;
  for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = A(0, i) * df[0] + A(1, i) * df[1] + A(2, i) * df[2];
  return out;
}

/// div_A X = A^{li} d_l X_i.
template <class S>
S cov_div(const Grid& g, const Mat3<S>& A, const std::array<S, 3>& X) {
  S out = zero_like(X[0]);
  for (int i = 0; i < 3; ++i) {
    const auto dx = gradient(g, X[static_cast<std::size_t>(i)]);
    for (int l = 0; l < 3; ++l) out += A(l, i) * dx[static_cast<std::size_t>(l)];
  }
  return out;
}

/// d_l Ahat^{li} for each i; zero in the continuum.
inline VectorField piola_residual(const GeometrySnapshot& geo, const Grid& g) {
  VectorField out = make_vector(g.shape());
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l) out[static_cast<std::size_t>(i)] += g.deriv(geo.Ahat(l, i), l);
  return out;
}

/// Nodewise determinant of a 3x3 field matrix.
inline Field determinant(const Mat3Field& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// max over nodes and (i, r) of |A^{li} d_l eta_r - delta_ir|.
inline double inverse_defect(const GeometrySnapshot& geo) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int r = 0; r < 3; ++r) {
      Field s = geo.A(0, i) * geo.grad(r, 0) + geo.A(1, i) * geo.grad(r, 1) + geo.A(2, i) * geo.grad(r, 2);
      if (i == r) s += -1.0;
      worst = std::max(worst, max_abs(s));
    }
  return worst;
}

/// D A^{li} + A^{lr} (d_k D eta_r) A^{ki} for D = d_axis (0-based grid axis).
inline Mat3Field variation_identity_residual(const VectorField& eta, int axis, const Grid& g) {
  const GeometrySnapshot geo = geometry(eta, g, 0.0);
  // D eta_r = column `axis` of the deformation gradient
  Mat3Field d_deta;  // d_deta(r, k) = d_k D eta_r
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) d_deta(r, k) = g.deriv(geo.grad(r, axis), k);
  Mat3Field out;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i) {
      Field s = g.deriv(geo.A(l, i), axis);
      for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) s += geo.A(l, r) * d_deta(r, k) * geo.A(k, i);
      out(l, i) = std::move(s);
    }
  return out;
}

/// Temporal variant: D is the centred difference over flow maps at t - dt and t + dt,
/// the identity is evaluated at the midpoint map.
inline Mat3Field variation_identity_residual_time(const VectorField& eta_minus, const VectorField& eta_mid,
                                                  const VectorField& eta_plus, double dt, const Grid& g) {
  const GeometrySnapshot gm = geometry(eta_minus, g, 0.0);
  const GeometrySnapshot g0 = geometry(eta_mid, g, 0.0);
  const GeometrySnapshot gp = geometry(eta_plus, g, 0.0);
  const double inv = 1.0 / (2.0 * dt);
  Mat3Field d_deta;  // d_k D eta_r
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) d_deta(r, k) = inv * (gp.grad(r, k) - gm.grad(r, k));
  Mat3Field out;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i) {
      Field s = inv * (gp.A(l, i) - gm.A(l, i));
      for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) s += g0.A(l, r) * d_deta(r, k) * g0.A(k, i);
      out(l, i) = std::move(s);
    }
  return out;
}

inline double max_abs(const Mat3Field& m) {
  double worst = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) worst = std::max(worst, max_abs(m(r, c)));
  return worst;
}

}  // namespace fbmhd
