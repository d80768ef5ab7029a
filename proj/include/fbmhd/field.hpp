#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fbmhd {

/// Node counts of a structured grid. Axis 0 (y1) is the fastest index.
struct Shape {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;

  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2) * static_cast<std::size_t>(n3);
  }
  [[nodiscard]] int extent(int axis) const { return axis == 0 ? n1 : (axis == 1 ? n2 : n3); }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Node-indexed scalar values on a grid.
class Field {
 public:
  Field() = default;
  explicit Field(Shape shape, double value = 0.0) : shape_(shape), data_(shape.size(), value) {}

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] std::size_t index(int i1, int i2, int i3) const noexcept {
    return (static_cast<std::size_t>(i3) * static_cast<std::size_t>(shape_.n2) + static_cast<std::size_t>(i2)) *
               static_cast<std::size_t>(shape_.n1) +
           static_cast<std::size_t>(i1);
  }

  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }
  double& operator()(int i1, int i2, int i3) noexcept { return data_[index(i1, i2, i3)]; }
  double operator()(int i1, int i2, int i3) const noexcept { return data_[index(i1, i2, i3)]; }

  [[nodiscard]] std::span<double> values() noexcept { return data_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

  Field& operator+=(const Field& o) {
    check(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Field& operator*=(const Field& o) {
    check(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] *= o.data_[k];
    return *this;
  }
  Field& operator+=(double s) noexcept {
    for (auto& x : data_) x += s;
    return *this;
  }
  Field& operator*=(double s) noexcept {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, const Field& b) { return a *= b; }
  friend Field operator+(Field a, double s) { return a += s; }
  friend Field operator+(double s, Field a) { return a += s; }
  friend Field operator-(Field a, double s) { return a += -s; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }

 private:
  void check(const Field& o) const {
    if (!(o.shape_ == shape_)) throw std::invalid_argument("field shape mismatch");
  }

  Shape shape_{};
  std::vector<double> data_;
};

using VectorField = std::array<Field, 3>;

/// 3x3 matrix of scalar fields (or jets), entry (r, c) stored row-major.
template <class S>
class Mat3 {
 public:
  Mat3() = default;
  explicit Mat3(const S& fill) { entries_.fill(fill); }
  S& operator()(int r, int c) noexcept { return entries_[static_cast<std::size_t>(3 * r + c)]; }
  const S& operator()(int r, int c) const noexcept { return entries_[static_cast<std::size_t>(3 * r + c)]; }

 private:
  std::array<S, 9> entries_;
};

using Mat3Field = Mat3<Field>;

inline VectorField make_vector(Shape shape, double value = 0.0) {
  return {Field(shape, value), Field(shape, value), Field(shape, value)};
}

template <class Fn>
Field map(const Field& f, Fn fn) {
  Field out(f.shape());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = fn(f[k]);
  return out;
}

inline double max_abs(const Field& f) noexcept {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const VectorField& f) noexcept {
  return std::max({max_abs(f[0]), max_abs(f[1]), max_abs(f[2])});
}

inline double min_value(const Field& f) noexcept {
  double m = f.empty() ? 0.0 : f[0];
  for (double x : f.values()) m = std::min(m, x);
  return m;
}

inline bool all_finite(const Field& f) noexcept {
  return std::all_of(f.values().begin(), f.values().end(), [](double x) { return std::isfinite(x); });
}

inline bool all_finite(const VectorField& f) noexcept {
  return all_finite(f[0]) && all_finite(f[1]) && all_finite(f[2]);
}

inline Field dot(const VectorField& a, const VectorField& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline VectorField operator+(const VectorField& a, const VectorField& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline VectorField operator-(const VectorField& a, const VectorField& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline VectorField operator*(double s, const VectorField& a) { return {s * a[0], s * a[1], s * a[2]}; }

}  // namespace fbmhd
