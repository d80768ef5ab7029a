#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbmhd/grid.hpp"
#include "fbmhd/initdata.hpp"
#include "fbmhd/tensor.hpp"

namespace fbmhd {

/// d_*^I = d_t^{i0} (sigma d3)^{i4} d1^{i1} d2^{i2} d3^{i3}; weight <I> = i0 + i1 + i2 + 2 i3 + i4.
struct MultiIndex {
  int i0 = 0, i1 = 0, i2 = 0, i3 = 0, i4 = 0;

  [[nodiscard]] int weight() const noexcept { return i0 + i1 + i2 + 2 * i3 + i4; }
  [[nodiscard]] int spatial_order() const noexcept { return i1 + i2 + i3 + i4; }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

inline std::string to_string(const MultiIndex& I) {
  return "(" + std::to_string(I.i0) + "," + std::to_string(I.i1) + "," + std::to_string(I.i2) + "," + std::to_string(I.i3) +
         "," + std::to_string(I.i4) + ")";
}

inline constexpr int max_norm_order = 8;

/// All indices with <I> <= m in lexicographic (i0, i1, i2, i3, i4) order; i0 = 0 unless with_time.
inline std::vector<MultiIndex> enumerate_indices(int m, bool with_time) {
  if (m < 0 || m > max_norm_order) throw std::invalid_argument("norm order must be in [0, 8]");
  std::vector<MultiIndex> out;
  const int t_max = with_time ? m : 0;
  for (int i0 = 0; i0 <= t_max; ++i0)
    for (int i1 = 0; i0 + i1 <= m; ++i1)
      for (int i2 = 0; i0 + i1 + i2 <= m; ++i2)
        for (int i3 = 0; i0 + i1 + i2 + 2 * i3 <= m; ++i3)
          for (int i4 = 0; i0 + i1 + i2 + 2 * i3 + i4 <= m; ++i4) out.push_back({i0, i1, i2, i3, i4});
  return out;
}

/// Indices of weight exactly m.
inline std::vector<MultiIndex> indices_of_weight(int m, bool with_time) {
  std::vector<MultiIndex> out;
  for (const auto& I : enumerate_indices(m, with_time))
    if (I.weight() == m) out.push_back(I);
  return out;
}

/// f, d_t f, ..., d_t^k f at one time. For a flow-map component the entries hold the
/// periodic displacement and `identity_axis` names the coordinate y_{axis+1} to add back
/// analytically (derivatives of y are never taken numerically).
struct TimeDerivativeStack {
  std::vector<Field> levels;
  int identity_axis = -1;

  [[nodiscard]] int depth() const noexcept { return static_cast<int>(levels.size()); }
};

inline TimeDerivativeStack make_stack(std::vector<Field> levels) { return {std::move(levels), -1}; }

/// Stacks of the three flow-map components from a jet.
inline std::array<TimeDerivativeStack, 3> eta_stacks(const Jet& jet, int depth) {
  std::array<TimeDerivativeStack, 3> out;
  for (int i = 0; i < 3; ++i) {
    auto& s = out[static_cast<std::size_t>(i)];
    s.identity_axis = i;
    for (int j = 0; j < depth; ++j) s.levels.push_back(jet.xi[static_cast<std::size_t>(i)].derivative(j));
  }
  return out;
}

inline std::array<TimeDerivativeStack, 3> vector_stacks(const VectorJet& f, int depth) {
  std::array<TimeDerivativeStack, 3> out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < depth; ++j) out[static_cast<std::size_t>(i)].levels.push_back(f[static_cast<std::size_t>(i)].derivative(j));
  return out;
}

inline TimeDerivativeStack scalar_stack(const TimeJet& f, int depth) {
  TimeDerivativeStack s;
  for (int j = 0; j < depth; ++j) s.levels.push_back(f.derivative(j));
  return s;
}

namespace detail {

/// (sigma d3)^n y3 as a polynomial in y3 (coefficients by ascending power), sigma = 1 - y3^2.
inline std::vector<double> weighted_normal_power_of_y3(int n) {
  std::vector<double> p = {0.0, 1.0};
  for (int k = 0; k < n; ++k) {
    std::vector<double> out(p.size() + 1, 0.0);
    for (std::size_t j = 1; j < p.size(); ++j) {
      const double d = static_cast<double>(j) * p[j];  // coefficient of y^{j-1} in p'
      out[j - 1] += d;
      out[j + 1] -= d;
    }
    p = std::move(out);
  }
  return p;
}

/// d_*^I applied to the coordinate y_{axis+1}.
inline Field identity_part(const MultiIndex& I, int axis, const Grid& g) {
  if (I.i0 > 0) return g.zeros();
  const int tangential = I.i1 + I.i2;
  if (axis < 2) {
    if (I.spatial_order() == 0) return g.coordinate(axis);
    const bool single = I.spatial_order() == 1 && ((axis == 0 && I.i1 == 1) || (axis == 1 && I.i2 == 1));
    return single ? Field(g.shape(), 1.0) : g.zeros();
  }
  if (tangential > 0 || I.i3 > 1) return g.zeros();
  if (I.i3 == 1) return I.i4 == 0 ? Field(g.shape(), 1.0) : g.zeros();
  const std::vector<double> p = weighted_normal_power_of_y3(I.i4);
  return map(g.coordinate(2), [&](double y) {
    double s = 0.0;
    for (std::size_t j = p.size(); j-- > 0;) s = s * y + p[j];
    return s;
  });
}

}  // namespace detail

/// The operator composition of the printed formula: d3^{i3} acts first, then d2^{i2}, d1^{i1},
/// then (sigma d3)^{i4}, on the i0-th time level.
inline Field apply_index(const MultiIndex& I, const TimeDerivativeStack& stack, const Grid& g) {
  if (I.i0 >= stack.depth())
    throw std::invalid_argument("time-derivative stack too shallow: need " + std::to_string(I.i0 + 1) + " levels");
  if (I.i4 > 0 && !g.slab()) throw std::invalid_argument("weighted normal derivative requires slab mode");
  Field f = stack.levels[static_cast<std::size_t>(I.i0)];
  f = g.deriv(f, 2, I.i3);
  f = g.deriv(f, 1, I.i2);
  f = g.deriv(f, 0, I.i1);
  for (int k = 0; k < I.i4; ++k) f = g.d_wnor(f);
  if (stack.identity_axis >= 0) f += detail::identity_part(I, stack.identity_axis, g);
  return f;
}

inline double aniso_norm_squared(const TimeDerivativeStack& stack, int m, bool with_time, const Grid& g) {
  double sum = 0.0;
  for (const auto& I : enumerate_indices(m, with_time)) {
    if (!g.slab() && I.i4 > 0) continue;
    const Field f = apply_index(I, stack, g);
    sum += g.integrate(f * f);
  }
  return sum;
}

/// ||f||_{H^m_*} (with_time = false) or ||f||_{m,*} (with_time = true). In torus mode the
/// weighted normal derivative is omitted (there is no boundary to degenerate at).
inline double aniso_norm(const TimeDerivativeStack& stack, int m, bool with_time, const Grid& g) {
  return std::sqrt(aniso_norm_squared(stack, m, with_time, g));
}

inline double aniso_norm(const Field& f, int m, const Grid& g) { return aniso_norm(make_stack({f}), m, false, g); }

/// Standard H^m norm: sum over all d1^a d2^b d3^c with a + b + c <= m.
inline double sobolev_norm(const Field& f, int m, const Grid& g) {
  double sum = 0.0;
  for (int a = 0; a <= m; ++a)
    for (int b = 0; a + b <= m; ++b)
      for (int c = 0; a + b + c <= m; ++c) {
        const Field d = g.deriv(g.deriv(g.deriv(f, 2, c), 1, b), 0, a);
        sum += g.integrate(d * d);
      }
  return std::sqrt(sum);
}

/// |A^{3i} d_*^I eta_i|^2_{L^2(Gamma)}.
inline double boundary_energy(const std::array<TimeDerivativeStack, 3>& eta, const Mat3Field& A, const MultiIndex& I, const Grid& g) {
  if (!g.slab()) throw std::invalid_argument("boundary energy requires slab mode");
  Field c(g.shape());
  for (int i = 0; i < 3; ++i) c += A(2, i) * apply_index(I, eta[static_cast<std::size_t>(i)], g);
  return g.boundary_integrate(c * c);
}

struct EnergyBreakdown {
  int order = 0;
  double eta = 0.0;
  double v = 0.0;
  double b = 0.0;
  double Q = 0.0;
  double boundary = 0.0;
  [[nodiscard]] double total() const noexcept { return eta + v + b + Q + boundary; }
};

/// E = ||eta||^2_{m,*} + ||v||^2_{m,*} + ||b||^2_{m,*} + ||Q||^2_{m,*} + sum_{<I> = m} |A^{3i} d_*^I eta_i|^2_Gamma
/// with all time levels taken from the jet (order >= m required). The boundary sum is
/// absent in torus mode.
inline EnergyBreakdown energy_functional(const Jet& jet, const Mat3Field& A, int m, const Grid& g) {
  if (jet.order < m) throw std::invalid_argument("jet order below the energy order");
  const int depth = m + 1;
  EnergyBreakdown e;
  e.order = m;
  const auto eta = eta_stacks(jet, depth);
  const auto v = vector_stacks(jet.v, depth);
  const auto b = vector_stacks(jet.b, depth);
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    e.eta += aniso_norm_squared(eta[si], m, true, g);
    e.v += aniso_norm_squared(v[si], m, true, g);
    e.b += aniso_norm_squared(b[si], m, true, g);
  }
  e.Q = aniso_norm_squared(scalar_stack(jet.Q, depth), m, true, g);
  if (g.slab())
    for (const auto& I : indices_of_weight(m, true)) e.boundary += boundary_energy(eta, A, I, g);
  return e;
}

}  // namespace fbmhd
