#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbmhd/field.hpp"

namespace fbmhd {

enum class Mode { slab, torus };

inline std::string to_string(Mode m) { return m == Mode::slab ? "slab" : "torus"; }

namespace detail {

/// Fourier differentiation along one periodic axis, backed by FFTW real transforms.
/// The Nyquist mode of even-length lines is dropped, so the order-m operator equals
/// the m-fold composition of the first-order one.
class SpectralLine {
 public:
  SpectralLine(int n, double period) : n_(n), period_(period) {
    real_ = fftw_alloc_real(static_cast<std::size_t>(n));
    spec_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    forward_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
  }
  SpectralLine(const SpectralLine&) = delete;
  SpectralLine& operator=(const SpectralLine&) = delete;
  ~SpectralLine() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  /// Differentiates `order` times (order 0 with `cutoff` applies a low-pass only).
  /// Modes with |k| > cutoff are removed.
  void apply(const double* in, double* out, std::ptrdiff_t stride, int order, int cutoff) {
    for (int j = 0; j < n_; ++j) real_[j] = in[j * stride];
    fftw_execute(forward_);
    const int half = n_ / 2;
    const double base = 2.0 * std::numbers::pi / period_;
    for (int k = 0; k <= half; ++k) {
      std::complex<double> c(spec_[k][0], spec_[k][1]);
      const bool nyquist = (n_ % 2 == 0) && (k == half);
      if ((nyquist && order > 0) || k > cutoff) {
        c = 0.0;
      } else if (order > 0) {
        const std::complex<double> ik(0.0, base * k);
        c *= std::pow(ik, order);
      }
      spec_[k][0] = c.real() / n_;
      spec_[k][1] = c.imag() / n_;
    }
    fftw_execute(backward_);
    for (int j = 0; j < n_; ++j) out[j * stride] = real_[j];
  }

  [[nodiscard]] int size() const noexcept { return n_; }

 private:
  int n_;
  double period_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// One row of a finite-difference first-derivative operator (weights in units of 1/h).
struct StencilRow {
  int first = 0;
  std::vector<double> weights;
};

/// Solves a small dense system by Gaussian elimination with partial pivoting.
inline std::vector<long double> solve_dense(std::vector<std::vector<long double>> a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    long double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

/// Fourth-order first-derivative operator on a vertex-centred line of n points.
/// Interior rows use the 5-point centred stencil. The two rows nearest each end use
/// one-sided stencils of up to 8 points whose moments agree with the centred stencil
/// beyond degree 4, so the leading truncation error is the same smooth function on
/// every row and composed derivatives keep fourth order up to the boundary.
inline std::vector<StencilRow> fourth_order_rows(int n) {
  static constexpr std::array<double, 5> centred = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
  const int width = std::min(8, n);
  auto centred_moment = [](int p) {
    long double m = 0.0L;
    for (int s = -2; s <= 2; ++s) m += static_cast<long double>(centred[static_cast<std::size_t>(s + 2)]) * std::pow(static_cast<long double>(s), p);
    return m;
  };
  auto closure = [&](int row) {
    std::vector<std::vector<long double>> a(static_cast<std::size_t>(width), std::vector<long double>(static_cast<std::size_t>(width)));
    std::vector<long double> b(static_cast<std::size_t>(width));
    for (int p = 0; p < width; ++p) {
      for (int j = 0; j < width; ++j) a[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)] = std::pow(static_cast<long double>(j - row), p);
      b[static_cast<std::size_t>(p)] = centred_moment(p);
    }
    auto w = solve_dense(a, b);
    return std::vector<double>(w.begin(), w.end());
  };

  std::vector<StencilRow> rows(static_cast<std::size_t>(n));
  const auto c0 = closure(0);
  const auto c1 = closure(1);
  for (int r = 0; r < n; ++r) {
    StencilRow& row = rows[static_cast<std::size_t>(r)];
    if (r < 2) {
      row.first = 0;
      row.weights = r == 0 ? c0 : c1;
    } else if (r >= n - 2) {
      const auto& src = (r == n - 1) ? c0 : c1;
      row.first = n - width;
      row.weights.assign(static_cast<std::size_t>(width), 0.0);
      for (int j = 0; j < width; ++j) row.weights[static_cast<std::size_t>(width - 1 - j)] = -src[static_cast<std::size_t>(j)];
    } else {
      row.first = r - 2;
      row.weights.assign(centred.begin(), centred.end());
    }
  }
  return rows;
}

}  // namespace detail

/// Discrete reference domain T^2 x (-1,1) (slab) or T^3 (torus).
///
/// Tangential axes y1, y2 have period 1 and are differentiated spectrally. In slab mode
/// y3 runs over the vertex-centred nodes of [-1, 1] (boundary planes included) and is
/// differentiated by fourth-order finite differences; in torus mode y3 has period 2.
class Grid {
 public:
  static constexpr double tangential_period = 1.0;
  static constexpr double normal_length = 2.0;

  Grid(int n1, int n2, int n3, Mode mode) : shape_{n1, n2, n3}, mode_(mode) {
    if (n1 < 4 || n2 < 4) throw std::invalid_argument("tangential sizes must be >= 4");
    if (n3 < 5) throw std::invalid_argument("normal size must be >= 5 (stencil width)");
    h_[0] = tangential_period / n1;
    h_[1] = tangential_period / n2;
    h_[2] = mode == Mode::slab ? normal_length / (n3 - 1) : normal_length / n3;
    lines_[0] = std::make_shared<detail::SpectralLine>(n1, tangential_period);
    lines_[1] = std::make_shared<detail::SpectralLine>(n2, tangential_period);
    if (mode == Mode::torus) {
      lines_[2] = std::make_shared<detail::SpectralLine>(n3, normal_length);
    } else {
      rows_ = std::make_shared<const std::vector<detail::StencilRow>>(detail::fourth_order_rows(n3));
    }
    for (int a = 0; a < 3; ++a) {
      coords_[static_cast<std::size_t>(a)] = Field(shape_);
      Field& c = coords_[static_cast<std::size_t>(a)];
      for (int k = 0; k < n3; ++k)
        for (int j = 0; j < n2; ++j)
          for (int i = 0; i < n1; ++i) c(i, j, k) = node_coordinate(a, a == 0 ? i : (a == 1 ? j : k));
    }
    sigma_ = mode == Mode::slab ? map(coords_[2], [](double y) { return (1.0 - y) * (1.0 + y); }) : Field(shape_, 1.0);
    if (mode == Mode::slab) {
      // sigma vanishes exactly on the boundary planes
      for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
          sigma_(i, j, 0) = 0.0;
          sigma_(i, j, n3 - 1) = 0.0;
        }
    }
  }

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] Mode mode() const noexcept { return mode_; }
  [[nodiscard]] bool slab() const noexcept { return mode_ == Mode::slab; }
  [[nodiscard]] double spacing(int axis) const { return h_.at(static_cast<std::size_t>(axis)); }
  [[nodiscard]] double min_spacing() const noexcept { return std::min({h_[0], h_[1], h_[2]}); }

  [[nodiscard]] double node_coordinate(int axis, int index) const {
    if (axis < 2) return index * h_[static_cast<std::size_t>(axis)];
    // torus nodes are shifted half a cell so the node set is symmetric about y3 = 0
    return mode_ == Mode::slab ? -1.0 + index * h_[2] : -1.0 + (index + 0.5) * h_[2];
  }

  /// Nodal coordinate field y_{axis+1}.
  [[nodiscard]] const Field& coordinate(int axis) const { return coords_.at(static_cast<std::size_t>(axis)); }
  [[nodiscard]] const Field& sigma() const noexcept { return sigma_; }

  [[nodiscard]] bool is_boundary_plane(int i3) const noexcept { return mode_ == Mode::slab && (i3 == 0 || i3 == shape_.n3 - 1); }

  [[nodiscard]] double volume() const noexcept { return tangential_period * tangential_period * normal_length; }
  [[nodiscard]] double boundary_area() const noexcept { return mode_ == Mode::slab ? 2.0 * tangential_period * tangential_period : 0.0; }

  [[nodiscard]] Field zeros() const { return Field(shape_); }

  /// Samples fn(y1, y2, y3) at every node.
  template <class Fn>
  [[nodiscard]] Field sample(Fn fn) const {
    Field f(shape_);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = fn(coords_[0][k], coords_[1][k], coords_[2][k]);
    return f;
  }

  /// Derivative along a zero-based axis (0, 1 tangential; 2 normal) applied `order` times.
  [[nodiscard]] Field deriv(const Field& f, int axis, int order = 1) const {
    check(f);
    if (order < 0) throw std::invalid_argument("negative derivative order");
    if (order == 0) return f;
    if (axis < 0 || axis > 2) throw std::invalid_argument("axis out of range");
    if (axis == 2 && mode_ == Mode::slab) {
      Field out = f;
      for (int k = 0; k < order; ++k) out = fd_normal(out);
      return out;
    }
    return spectral(f, axis, order, shape_.extent(axis));
  }

  /// Tangential derivative along axis 1 or 2 (one-based, as y1/y2).
  [[nodiscard]] Field d_tan(const Field& f, int axis, int order = 1) const {
    if (axis != 1 && axis != 2) throw std::invalid_argument("tangential axis must be 1 or 2");
    return deriv(f, axis - 1, order);
  }

  [[nodiscard]] Field d_nor(const Field& f, int order = 1) const { return deriv(f, 2, order); }

  /// Weighted normal derivative sigma * d3 f. Slab mode only.
  [[nodiscard]] Field d_wnor(const Field& f) const {
    if (mode_ != Mode::slab) throw std::invalid_argument("weighted normal derivative requires slab mode");
    return sigma_ * d_nor(f);
  }

  /// Removes tangential Fourier modes above 2/3 of the Nyquist wavenumber.
  [[nodiscard]] Field filter_tangential(const Field& f) const {
    Field out = spectral(f, 0, 0, shape_.n1 / 3);
    return spectral(out, 1, 0, shape_.n2 / 3);
  }

  /// Volume quadrature: uniform weights tangentially, trapezoid (slab) or uniform (torus) normally.
  [[nodiscard]] double integrate(const Field& f) const {
    check(f);
    double total = 0.0;
    for (int k = 0; k < shape_.n3; ++k) {
      double plane = 0.0;
      for (int j = 0; j < shape_.n2; ++j)
        for (int i = 0; i < shape_.n1; ++i) plane += f(i, j, k);
      total += normal_weight(k) * plane;
    }
    return total * h_[0] * h_[1];
  }

  /// Surface quadrature summed over both boundary planes. Slab mode only.
  [[nodiscard]] double boundary_integrate(const Field& f) const {
    check(f);
    if (mode_ != Mode::slab) throw std::invalid_argument("boundary integral requires slab mode");
    double total = 0.0;
    for (int k : {0, shape_.n3 - 1})
      for (int j = 0; j < shape_.n2; ++j)
        for (int i = 0; i < shape_.n1; ++i) total += f(i, j, k);
    return total * h_[0] * h_[1];
  }

  [[nodiscard]] double l2_norm(const Field& f) const { return std::sqrt(std::max(0.0, integrate(f * f))); }
  [[nodiscard]] double l2_norm(const VectorField& f) const {
    return std::sqrt(std::max(0.0, integrate(f[0] * f[0] + f[1] * f[1] + f[2] * f[2])));
  }
  [[nodiscard]] double boundary_l2_norm(const Field& f) const { return std::sqrt(std::max(0.0, boundary_integrate(f * f))); }

  [[nodiscard]] double normal_weight(int k) const noexcept {
    if (mode_ == Mode::slab && (k == 0 || k == shape_.n3 - 1)) return 0.5 * h_[2];
    return h_[2];
  }

  [[nodiscard]] const std::vector<detail::StencilRow>& normal_stencil() const {
    if (!rows_) throw std::invalid_argument("normal stencil only exists in slab mode");
    return *rows_;
  }

 private:
  void check(const Field& f) const {
    if (!(f.shape() == shape_)) throw std::invalid_argument("field does not match grid");
  }

  [[nodiscard]] Field fd_normal(const Field& f) const {
    Field out(shape_);
    const auto& rows = *rows_;
    const double inv_h = 1.0 / h_[2];
    const std::size_t plane = static_cast<std::size_t>(shape_.n1) * static_cast<std::size_t>(shape_.n2);
    for (int k = 0; k < shape_.n3; ++k) {
      const auto& row = rows[static_cast<std::size_t>(k)];
      double* dst = out.values().data() + static_cast<std::size_t>(k) * plane;
      for (std::size_t j = 0; j < row.weights.size(); ++j) {
        const double w = row.weights[j] * inv_h;
        if (w == 0.0) continue;
        const double* src = f.values().data() + (static_cast<std::size_t>(row.first) + j) * plane;
        for (std::size_t p = 0; p < plane; ++p) dst[p] += w * src[p];
      }
    }
    return out;
  }

  [[nodiscard]] Field spectral(const Field& f, int axis, int order, int cutoff) const {
    Field out(shape_);
    auto& line = *lines_[static_cast<std::size_t>(axis)];
    const int n1 = shape_.n1, n2 = shape_.n2, n3 = shape_.n3;
    const double* in = f.values().data();
    double* dst = out.values().data();
    if (axis == 0) {
      for (int k = 0; k < n3; ++k)
        for (int j = 0; j < n2; ++j) {
          const std::size_t off = f.index(0, j, k);
          line.apply(in + off, dst + off, 1, order, cutoff);
        }
    } else if (axis == 1) {
      for (int k = 0; k < n3; ++k)
        for (int i = 0; i < n1; ++i) {
          const std::size_t off = f.index(i, 0, k);
          line.apply(in + off, dst + off, n1, order, cutoff);
        }
    } else {
      const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(n1) * n2;
      for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
          const std::size_t off = f.index(i, j, 0);
          line.apply(in + off, dst + off, stride, order, cutoff);
        }
    }
    return out;
  }

  Shape shape_;
  Mode mode_;
  std::array<double, 3> h_{};
  std::array<std::shared_ptr<detail::SpectralLine>, 3> lines_{};
  std::shared_ptr<const std::vector<detail::StencilRow>> rows_;
  std::array<Field, 3> coords_;
  Field sigma_;
};

/// Builds a grid; sizes below the stencil width are rejected.
inline Grid build_grid(int n1, int n2, int n3, Mode mode) { return Grid(n1, n2, n3, mode); }

/// Values of f on the boundary planes as a field that is zero elsewhere.
inline Field boundary_restriction(const Grid& g, const Field& f) {
  Field out(g.shape());
  const auto& s = g.shape();
  if (!g.slab()) return out;
  for (int k : {0, s.n3 - 1})
    for (int j = 0; j < s.n2; ++j)
      for (int i = 0; i < s.n1; ++i) out(i, j, k) = f(i, j, k);
  return out;
}

/// Outward normal component N3 at a node: +1 on the top plane, -1 on the bottom plane, 0 elsewhere.
inline double outward_normal(const Grid& g, int i3) noexcept {
  if (!g.slab()) return 0.0;
  if (i3 == g.shape().n3 - 1) return 1.0;
  if (i3 == 0) return -1.0;
  return 0.0;
}

}  // namespace fbmhd
