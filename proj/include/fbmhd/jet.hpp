#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fbmhd/field.hpp"
#include "fbmhd/grid.hpp"

namespace fbmhd {

/// Truncated Taylor series in time, f(t0 + s) = sum_n c[n] s^n, with field coefficients.
///
/// Arithmetic is exact on the retained coefficients, so evaluating the right-hand side of
/// the system on jets yields the exact time derivatives of the semi-discrete flow.
class TimeJet {
 public:
  TimeJet() = default;
  TimeJet(Shape shape, int depth) : c_(static_cast<std::size_t>(depth), Field(shape)) {}
  /// A quantity that is constant in time.
  TimeJet(const Field& value, int depth) : c_(static_cast<std::size_t>(depth), Field(value.shape())) {
    if (depth < 1) throw std::invalid_argument("jet depth must be >= 1");
    c_[0] = value;
  }

  [[nodiscard]] int depth() const noexcept { return static_cast<int>(c_.size()); }
  [[nodiscard]] const Shape& shape() const { return c_.at(0).shape(); }
  Field& operator[](int n) { return c_.at(static_cast<std::size_t>(n)); }
  const Field& operator[](int n) const { return c_.at(static_cast<std::size_t>(n)); }

  /// n-th time derivative at the expansion point: n! c[n].
  [[nodiscard]] Field derivative(int n) const {
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    return fact * (*this)[n];
  }

  /// Copy keeping only the first `depth` coefficients.
  [[nodiscard]] TimeJet truncated(int depth) const {
    TimeJet out;
    out.c_.assign(c_.begin(), c_.begin() + depth);
    return out;
  }

  TimeJet& operator+=(const TimeJet& o) {
    check(o);
    for (std::size_t n = 0; n < c_.size(); ++n) c_[n] += o.c_[n];
    return *this;
  }
  TimeJet& operator-=(const TimeJet& o) {
    check(o);
    for (std::size_t n = 0; n < c_.size(); ++n) c_[n] -= o.c_[n];
    return *this;
  }
  TimeJet& operator*=(double s) {
    for (auto& f : c_) f *= s;
    return *this;
  }
  TimeJet& operator*=(const Field& f) {
    for (auto& x : c_) x *= f;
    return *this;
  }
  TimeJet& operator+=(double s) {
    c_.at(0) += s;
    return *this;
  }

  friend TimeJet operator+(TimeJet a, const TimeJet& b) { return a += b; }
  friend TimeJet operator-(TimeJet a, const TimeJet& b) { return a -= b; }
  friend TimeJet operator*(TimeJet a, double s) { return a *= s; }
  friend TimeJet operator*(double s, TimeJet a) { return a *= s; }
  friend TimeJet operator*(TimeJet a, const Field& f) { return a *= f; }
  friend TimeJet operator*(const Field& f, TimeJet a) { return a *= f; }
  friend TimeJet operator+(TimeJet a, double s) { return a += s; }
  friend TimeJet operator-(TimeJet a, double s) { return a += -s; }
  friend TimeJet operator-(TimeJet a) { return a *= -1.0; }

  /// Cauchy product truncated to the common depth.
  friend TimeJet operator*(const TimeJet& a, const TimeJet& b) {
    a.check(b);
    TimeJet out(a.shape(), a.depth());
    for (int n = 0; n < a.depth(); ++n)
      for (int k = 0; k <= n; ++k) out[n] += a[k] * b[n - k];
    return out;
  }
  friend TimeJet operator+(TimeJet a, const Field& f) {
    a[0] += f;
    return a;
  }
  friend TimeJet operator+(const Field& f, TimeJet a) { return std::move(a) + f; }
  friend TimeJet operator-(TimeJet a, const Field& f) {
    a[0] -= f;
    return a;
  }

 private:
  void check(const TimeJet& o) const {
    if (o.c_.size() != c_.size()) throw std::invalid_argument("jet depth mismatch");
  }

  std::vector<Field> c_;
};

using VectorJet = std::array<TimeJet, 3>;

// Scalar-algebra primitives shared by Field and TimeJet so geometric and dynamical
// formulas can be written once.

inline Field reciprocal(const Field& f) {
  return map(f, [](double x) { return 1.0 / x; });
}

inline Field exponential(const Field& f) {
  return map(f, [](double x) { return std::exp(x); });
}

inline TimeJet reciprocal(const TimeJet& a) {
  TimeJet r(a.shape(), a.depth());
  const Field inv0 = reciprocal(a[0]);
  r[0] = inv0;
  for (int n = 1; n < a.depth(); ++n) {
    Field s(a.shape());
    for (int k = 1; k <= n; ++k) s += a[k] * r[n - k];
    r[n] = -1.0 * (s * inv0);
  }
  return r;
}

inline TimeJet exponential(const TimeJet& a) {
  TimeJet e(a.shape(), a.depth());
  e[0] = exponential(a[0]);
  for (int n = 1; n < a.depth(); ++n) {
    Field s(a.shape());
    for (int k = 1; k <= n; ++k) s += static_cast<double>(k) * (a[k] * e[n - k]);
    e[n] = (1.0 / n) * s;
  }
  return e;
}

inline Field derivative(const Grid& g, const Field& f, int axis) { return g.deriv(f, axis); }

inline TimeJet derivative(const Grid& g, const TimeJet& f, int axis) {
  TimeJet out = f;
  for (int n = 0; n < f.depth(); ++n) out[n] = g.deriv(f[n], axis);
  return out;
}

inline Field filter(const Grid& g, const Field& f) { return g.filter_tangential(f); }

/// Time-zero coefficient, i.e. the value at the expansion point.
inline const Field& value_of(const Field& f) { return f; }
inline const Field& value_of(const TimeJet& f) { return f[0]; }

/// A zero of the same kind and shape as `like`.
inline Field zero_like(const Field& like) { return Field(like.shape()); }
inline TimeJet zero_like(const TimeJet& like) { return TimeJet(like.shape(), like.depth()); }

/// Promotes a time-constant field to the kind of `like`.
inline Field lift(const Field& f, const Field&) { return f; }
inline TimeJet lift(const Field& f, const TimeJet& like) { return TimeJet(f, like.depth()); }

}  // namespace fbmhd
