#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fbmhd/dynamics.hpp"
#include "fbmhd/errors.hpp"
#include "fbmhd/norms.hpp"
#include "fbmhd/tensor.hpp"

namespace fbmhd {

inline constexpr int max_normal_good_unknown_order = 4;
inline constexpr int max_tangential_good_unknown_order = 8;

/// D^k with D = d_{axis+1}: the index patterns the good-unknown checks support.
struct AxisPower {
  int axis = 0;
  int k = 1;
};

inline MultiIndex to_multi_index(AxisPower p) {
  MultiIndex I;
  (p.axis == 0 ? I.i1 : (p.axis == 1 ? I.i2 : I.i3)) = p.k;
  return I;
}

/// Pure normal d3^k (k <= 4) or pure tangential d1^k / d2^k (k <= 8); every first-order index
/// is one of these.
inline AxisPower axis_power(const MultiIndex& I, int max_order = max_tangential_good_unknown_order) {
  const int nonzero = (I.i1 > 0) + (I.i2 > 0) + (I.i3 > 0);
  if (I.i0 != 0 || I.i4 != 0 || nonzero != 1) throw ConfigError("unsupported good-unknown index pattern " + to_string(I));
  const AxisPower p = I.i1 > 0 ? AxisPower{0, I.i1} : (I.i2 > 0 ? AxisPower{1, I.i2} : AxisPower{2, I.i3});
  const int cap = p.axis == 2 ? max_normal_good_unknown_order : max_tangential_good_unknown_order;
  if (p.k > std::min(cap, max_order)) throw ConfigError("good-unknown order exceeds configuration for " + to_string(I));
  return p;
}

namespace detail {

inline double choose(int n, int r) { return static_cast<double>(binomial(n, r)); }

inline Field dpow(const Grid& g, const Field& f, int axis, int n) { return n == 0 ? f : g.deriv(f, axis, n); }

inline Mat3Field dpow(const Grid& g, const Mat3Field& m, int axis, int n) {
  Mat3Field out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) = dpow(g, m(r, c), axis, n);
  return out;
}

/// D^n eta from the displacement; n = 0 returns eta itself.
inline VectorField eta_power(const Grid& g, const VectorField& xi, int axis, int n) {
  VectorField out;
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    out[si] = dpow(g, xi[si], axis, n);
    if (n == 0) out[si] += g.coordinate(i);
    if (n == 1 && i == axis) out[si] += 1.0;
  }
  return out;
}

/// (r, m) -> d_m X_r.
inline Mat3Field jacobian(const Grid& g, const VectorField& X) {
  Mat3Field out;
  for (int r = 0; r < 3; ++r)
    for (int m = 0; m < 3; ++m) out(r, m) = g.deriv(X[static_cast<std::size_t>(r)], m);
  return out;
}

/// X . grad_A f = X_p A^{lp} d_l f.
inline Field dot_grad(const Grid& g, const Mat3Field& A, const VectorField& X, const Field& f) {
  return dot(X, cov_grad(g, A, f));
}

/// (r, i) -> grad_A^i (grad_A^r f).
inline Mat3Field hessian_A(const Grid& g, const Mat3Field& A, const Field& f) {
  const VectorField gf = cov_grad(g, A, f);
  Mat3Field out;
  for (int r = 0; r < 3; ++r) {
    const VectorField h = cov_grad(g, A, gf[static_cast<std::size_t>(r)]);
    for (int i = 0; i < 3; ++i) out(r, i) = h[static_cast<std::size_t>(i)];
  }
  return out;
}

/// sum_l M^{li} d_l f for a matrix field indexed (l, i).
inline VectorField contract_rows(const Grid& g, const Mat3Field& M, const Field& f) {
  const VectorField df = gradient(g, f);
  VectorField out = make_vector(f.shape());
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l) out[static_cast<std::size_t>(i)] += M(l, i) * df[static_cast<std::size_t>(l)];
  return out;
}

/// [D^n, A^{lp} A^{mi}] X_{mp} summed over m, p, indexed (l, i), X given as (p, m) -> X_{mp}.
inline Mat3Field product_commutator(const Grid& g, const Mat3Field& A, const Mat3Field& X, int axis, int n) {
  const Shape sh = A(0, 0).shape();
  Mat3Field out(Field(sh, 0.0));
  if (n == 0) return out;
  Mat3Field dX = dpow(g, X, axis, n);
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i) {
      Field P(sh), Q(sh);
      for (int m = 0; m < 3; ++m)
        for (int p = 0; p < 3; ++p) {
          const Field aa = A(l, p) * A(m, i);
          P += aa * X(p, m);
          Q += aa * dX(p, m);
        }
      out(l, i) = dpow(g, P, axis, n) - Q;
    }
  return out;
}

inline std::vector<Field> as_components(const VectorField& v) { return {v[0], v[1], v[2]}; }

}  // namespace detail

/// Standard good unknown F = D^k f - (D^k eta_p) A^{lp} d_l f.
inline Field good_unknown(const MultiIndex& I, const Field& f, const VectorField& eta, const GeometrySnapshot& geo, const Grid& g,
                          int max_order = max_tangential_good_unknown_order) {
  const AxisPower p = axis_power(I, max_order);
  const VectorField Dk_eta = detail::eta_power(g, displacement(eta, g), p.axis, p.k);
  return detail::dpow(g, f, p.axis, p.k) - detail::dot_grad(g, geo.A, Dk_eta, f);
}

/// The three groups in D^k(grad_A f) = grad_A F + C(f):
///   leading    (D^k eta_p) grad_A^i (grad_A^p f)
///   commutator -([D^{k-1}, A^{lp} A^{mi}] D d_m eta_p) d_l f
///   leibniz    sum_{N=1}^{k-1} C(k, N) (D^N A^{li}) (D^{k-N} d_l f)
struct CommutatorTerms {
  VectorField leading;
  VectorField commutator;
  VectorField leibniz;

  [[nodiscard]] std::vector<VectorField> list() const { return {leading, commutator, leibniz}; }
  [[nodiscard]] VectorField sum() const { return leading + commutator + leibniz; }
};

inline CommutatorTerms commutator_terms(const MultiIndex& I, const Field& f, const VectorField& eta, const GeometrySnapshot& geo,
                                        const Grid& g) {
  const AxisPower p = axis_power(I);
  const VectorField xi = displacement(eta, g);
  const Mat3Field& A = geo.A;
  const Shape sh = f.shape();
  CommutatorTerms c{make_vector(sh), make_vector(sh), make_vector(sh)};

  const VectorField Dk_eta = detail::eta_power(g, xi, p.axis, p.k);
  const Mat3Field H = detail::hessian_A(g, A, f);
  for (int i = 0; i < 3; ++i)
    for (int r = 0; r < 3; ++r) c.leading[static_cast<std::size_t>(i)] += Dk_eta[static_cast<std::size_t>(r)] * H(r, i);

  const Mat3Field X = detail::jacobian(g, detail::eta_power(g, xi, p.axis, 1));
  c.commutator = -1.0 * detail::contract_rows(g, detail::product_commutator(g, A, X, p.axis, p.k - 1), f);

  for (int N = 1; N <= p.k - 1; ++N) {
    const Mat3Field dA = detail::dpow(g, A, p.axis, N);
    const Field dkf = detail::dpow(g, f, p.axis, p.k - N);
    c.leibniz = c.leibniz + detail::choose(p.k, N) * detail::contract_rows(g, dA, dkf);
  }
  return c;
}

/// One dual evaluation: lhs and rhs computed independently, residual recomputed on demand.
struct GoodUnknownReport {
  std::string name;
  MultiIndex index;
  std::string field;
  std::vector<Field> lhs;
  std::vector<Field> rhs;

  [[nodiscard]] double residual_l2(const Grid& g) const {
    double s = 0.0;
    for (std::size_t c = 0; c < lhs.size(); ++c) {
      const Field d = lhs[c] - rhs[c];
      s += g.integrate(d * d);
    }
    return std::sqrt(std::max(0.0, s));
  }
  [[nodiscard]] double residual_max() const {
    double m = 0.0;
    for (std::size_t c = 0; c < lhs.size(); ++c) m = std::max(m, max_abs(lhs[c] - rhs[c]));
    return m;
  }
  [[nodiscard]] double lhs_l2(const Grid& g) const {
    double s = 0.0;
    for (const auto& f : lhs) s += g.integrate(f * f);
    return std::sqrt(std::max(0.0, s));
  }
  [[nodiscard]] double relative(const Grid& g) const {
    const double n = lhs_l2(g);
    return n > 0.0 ? residual_l2(g) / n : residual_l2(g);
  }
};

/// D^k(grad_A f) against grad_A(good unknown) + sum of commutator terms. For k = 1 the
/// commutator groups vanish and this is D(grad_A f) = grad_A(Df - D eta . grad_A f) + D eta_r grad_A(grad_A^r f).
inline GoodUnknownReport check_standard_decomposition(const MultiIndex& I, const Field& f, const VectorField& eta,
                                                      const GeometrySnapshot& geo, const Grid& g, std::string field = "f") {
  const AxisPower p = axis_power(I);
  GoodUnknownReport rep;
  rep.name = p.k == 1 ? "first-order" : "standard";
  rep.index = I;
  rep.field = std::move(field);
  VectorField lhs = cov_grad(g, geo.A, f);
  for (auto& c : lhs) c = detail::dpow(g, c, p.axis, p.k);
  const VectorField rhs = cov_grad(g, geo.A, good_unknown(I, f, eta, geo, g)) + commutator_terms(I, f, eta, geo, g).sum();
  rep.lhs = detail::as_components(lhs);
  rep.rhs = detail::as_components(rhs);
  return rep;
}

inline GoodUnknownReport first_order_identity(int axis, const Field& f, const VectorField& eta, const GeometrySnapshot& geo,
                                             const Grid& g) {
  return check_standard_decomposition(to_multi_index({axis, 1}), f, eta, geo, g);
}

// ---- modified good unknowns for a tangential D^k ----

struct ModifiedUnknowns {
  VectorField V;
  Field Q;
};

/// V*_i = D^k v_i - D^k eta.grad_A v_i - k D^{k-1}eta.grad_A Dv_i - k D^{k-1}v.grad_A D eta_i
///        + k D^{k-1}eta.grad_A D eta.grad_A v_i + k D^{k-1}eta.grad_A v.grad_A D eta_i
/// Q*   = D^k Q - D^k eta.grad_A Q - k D^{k-1}eta.grad_A DQ + k D^{k-1}eta.grad_A D eta.grad_A Q
/// with X.grad_A Y.grad_A f = X_p A^{mp} d_m Y_r A^{lr} d_l f. `modified = false` keeps only the
/// first two terms (the standard good unknowns).
inline ModifiedUnknowns modified_good_unknowns(int axis, int k, const VectorField& eta, const VectorField& v, const Field& Q,
                                               const GeometrySnapshot& geo, const Grid& g, bool modified = true) {
  if (axis < 0 || axis > 1) throw ConfigError("modified good unknowns need a tangential direction");
  if (k < 1 || k > max_tangential_good_unknown_order) throw ConfigError("modified good-unknown order must be in [1, 8]");
  const Mat3Field& A = geo.A;
  const VectorField xi = displacement(eta, g);
  const VectorField Dk_eta = detail::eta_power(g, xi, axis, k);
  const VectorField Dk1_eta = detail::eta_power(g, xi, axis, k - 1);
  const VectorField D_eta = detail::eta_power(g, xi, axis, 1);
  const double kk = k;

  // (r) -> X.grad_A D eta_r for X = D^{k-1} eta
  VectorField chain_eta;
  for (int r = 0; r < 3; ++r) chain_eta[static_cast<std::size_t>(r)] = detail::dot_grad(g, A, Dk1_eta, D_eta[static_cast<std::size_t>(r)]);

  ModifiedUnknowns out;
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    Field Vi = detail::dpow(g, v[si], axis, k) - detail::dot_grad(g, A, Dk_eta, v[si]);
    if (modified) {
      VectorField Dk1_v;
      for (int p = 0; p < 3; ++p) Dk1_v[static_cast<std::size_t>(p)] = detail::dpow(g, v[static_cast<std::size_t>(p)], axis, k - 1);
      VectorField chain_v;
      for (int r = 0; r < 3; ++r) chain_v[static_cast<std::size_t>(r)] = detail::dot_grad(g, A, Dk1_eta, v[static_cast<std::size_t>(r)]);
      Vi -= kk * detail::dot_grad(g, A, Dk1_eta, g.deriv(v[si], axis));
      Vi -= kk * detail::dot_grad(g, A, Dk1_v, D_eta[si]);
      Vi += kk * detail::dot_grad(g, A, chain_eta, v[si]);
      Vi += kk * detail::dot_grad(g, A, chain_v, D_eta[si]);
    }
    out.V[si] = std::move(Vi);
  }
  out.Q = detail::dpow(g, Q, axis, k) - detail::dot_grad(g, A, Dk_eta, Q);
  if (modified) {
    out.Q -= kk * detail::dot_grad(g, A, Dk1_eta, g.deriv(Q, axis));
    out.Q += kk * detail::dot_grad(g, A, chain_eta, Q);
  }
  return out;
}

/// Named remainder terms of the tangential decompositions
///   D^k(div_A v)  = div_A V* + C0(v) + ... + C6(v) + E1(v)
///   D^k(grad_A Q) = grad_A Q* + C0(Q) + ... + C6(Q) + E1(Q)
/// each assembled from its own formula. E1 collects the mixed products
/// -sum_{N=1}^{k-2} C(k-1, N) (D^N A^{lr})(D^{k-1-N} A^{mi}) D d_m eta_r d_l f that the
/// expansion of D^{k-1}(A^{lr} A^{mi}) leaves over.
struct TangentialTerms {
  std::vector<std::pair<std::string, std::vector<Field>>> terms;

  [[nodiscard]] std::vector<Field> sum(bool include_e1 = true) const {
    std::vector<Field> out;
    for (const auto& [name, f] : terms) {
      if (!include_e1 && name == "E1") continue;
      if (out.empty()) {
        out = f;
        continue;
      }
      for (std::size_t c = 0; c < f.size(); ++c) out[c] += f[c];
    }
    return out;
  }
};

namespace detail {

/// Everything that depends only on the map.
struct TangentialContext {
  const Grid& g;
  int axis;
  int k;
  Mat3Field A;
  std::vector<Mat3Field> dA;       // D^N A, N = 0..k-1
  std::vector<VectorField> deta;   // D^N eta, N = 0..k
  Mat3Field X;                     // (r, m) -> d_m D eta_r
  Mat3Field T;                     // [D^{k-2}, A^{lp} A^{mi}] D d_m eta_p, indexed (l, i)
  Mat3Field M0;                    // -sum_{N=2}^{k-2} C(k-1,N) D^N(A^{lr}A^{mi}) d_m D^{k-N} eta_r, (l, i)
  Mat3Field ME;                    // -sum_{N=1}^{k-2} C(k-1,N) D^N A^{lr} D^{k-1-N} A^{mi} d_m D eta_r, (l, i)
  Mat3Field gradA_Deta;            // (p, i) -> grad_A^p D eta_i

  TangentialContext(const Grid& grid, int ax, int order, const VectorField& eta, const GeometrySnapshot& geo)
      : g(grid), axis(ax), k(order), A(geo.A) {
    const VectorField xi = displacement(eta, g);
    for (int N = 0; N <= k; ++N) deta.push_back(eta_power(g, xi, axis, N));
    for (int N = 0; N <= k - 1; ++N) dA.push_back(dpow(g, A, axis, N));
    X = jacobian(g, deta[1]);
    T = product_commutator(g, A, X, axis, k - 2);
    const Shape sh = A(0, 0).shape();
    M0 = Mat3Field(Field(sh, 0.0));
    ME = Mat3Field(Field(sh, 0.0));
    for (int N = 2; N <= k - 2; ++N) {
      const Mat3Field Y = jacobian(g, deta[static_cast<std::size_t>(k - N)]);
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
          for (int r = 0; r < 3; ++r)
            for (int m = 0; m < 3; ++m) M0(l, i) -= choose(k - 1, N) * dpow(g, A(l, r) * A(m, i), axis, N) * Y(r, m);
    }
    for (int N = 1; N <= k - 2; ++N)
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
          for (int r = 0; r < 3; ++r)
            for (int m = 0; m < 3; ++m)
              ME(l, i) -= choose(k - 1, N) * dA[static_cast<std::size_t>(N)](l, r) * dA[static_cast<std::size_t>(k - 1 - N)](m, i) * X(r, m);
    for (int i = 0; i < 3; ++i) {
      const VectorField gi = cov_grad(g, A, deta[1][static_cast<std::size_t>(i)]);
      for (int p = 0; p < 3; ++p) gradA_Deta(p, i) = gi[static_cast<std::size_t>(p)];
    }
  }

  [[nodiscard]] Field D(const Field& f, int n) const { return dpow(g, f, axis, n); }
  [[nodiscard]] const VectorField& eta_k1() const { return deta[static_cast<std::size_t>(k - 1)]; }

  /// (p) -> sum_r grad_A^p D eta_r grad_A^r f
  [[nodiscard]] VectorField eta_chain(const Field& f) const {
    const VectorField gf = cov_grad(g, A, f);
    VectorField out = make_vector(f.shape());
    for (int p = 0; p < 3; ++p)
      for (int r = 0; r < 3; ++r) out[static_cast<std::size_t>(p)] += gradA_Deta(p, r) * gf[static_cast<std::size_t>(r)];
    return out;
  }

  // generic terms, component i

  [[nodiscard]] VectorField C0(const Field& f) const {
    VectorField out = make_vector(f.shape());
    const Mat3Field H = hessian_A(g, A, f);
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < 3; ++r) out[static_cast<std::size_t>(i)] += deta[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] * H(r, i);
    out = out + contract_rows(g, M0, f);
    for (int N = 2; N <= k - 2; ++N) out = out + choose(k, N) * contract_rows(g, dA[static_cast<std::size_t>(N)], D(f, k - N));
    return out;
  }

  [[nodiscard]] VectorField C1(const Field& f) const {
    const Field Df = D(f, 1);
    const Mat3Field H = hessian_A(g, A, Df);
    VectorField out = make_vector(f.shape());
    for (int i = 0; i < 3; ++i)
      for (int p = 0; p < 3; ++p) out[static_cast<std::size_t>(i)] += static_cast<double>(k) * H(p, i) * eta_k1()[static_cast<std::size_t>(p)];
    return out - static_cast<double>(k) * contract_rows(g, T, Df);
  }

  [[nodiscard]] VectorField C3(const Field& f) const {
    const VectorField inner = eta_chain(f);
    VectorField out = make_vector(f.shape());
    for (int p = 0; p < 3; ++p) {
      const VectorField gi = cov_grad(g, A, inner[static_cast<std::size_t>(p)]);
      for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] -= eta_k1()[static_cast<std::size_t>(p)] * gi[static_cast<std::size_t>(i)];
    }
    // ([D^{k-2}, A^{mp} A^{ni}] D d_n eta_p) A^{lr} D d_m eta_r d_l f
    const VectorField gf = cov_grad(g, A, f);
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m)
        for (int r = 0; r < 3; ++r) out[static_cast<std::size_t>(i)] += T(m, i) * X(r, m) * gf[static_cast<std::size_t>(r)];
    return out;
  }

  [[nodiscard]] VectorField C5(const Field& f) const {
    const VectorField inner = eta_chain(f);
    VectorField out = make_vector(f.shape());
    for (int r = 0; r < 3; ++r) {
      const VectorField gi = cov_grad(g, A, inner[static_cast<std::size_t>(r)]);
      for (int i = 0; i < 3; ++i)
        out[static_cast<std::size_t>(i)] -= static_cast<double>(k - 1) * eta_k1()[static_cast<std::size_t>(r)] * gi[static_cast<std::size_t>(i)];
    }
    return out;
  }

  [[nodiscard]] VectorField E1(const Field& f) const { return contract_rows(g, ME, f); }

  // velocity-specific terms (scalar, summed over i)

  [[nodiscard]] Field C2v(const VectorField& v) const {
    Field out(v[0].shape());
    for (int p = 0; p < 3; ++p) {
      // Z^p = grad_A^i (D d_m eta_i A^{mp})
      VectorField W;
      for (int i = 0; i < 3; ++i) W[static_cast<std::size_t>(i)] = X(i, 0) * A(0, p) + X(i, 1) * A(1, p) + X(i, 2) * A(2, p);
      out += static_cast<double>(k) * cov_div(g, A, W) * D(v[static_cast<std::size_t>(p)], k - 1);
    }
    return out;
  }

  /// (p, i) -> sum_r grad_A^p v_r grad_A^r D eta_i
  [[nodiscard]] Mat3Field velocity_chain(const VectorField& v) const {
    Mat3Field gv;  // (r, p) -> grad_A^p v_r
    for (int r = 0; r < 3; ++r) {
      const VectorField gr = cov_grad(g, A, v[static_cast<std::size_t>(r)]);
      for (int p = 0; p < 3; ++p) gv(r, p) = gr[static_cast<std::size_t>(p)];
    }
    Mat3Field out(Field(v[0].shape(), 0.0));
    for (int p = 0; p < 3; ++p)
      for (int i = 0; i < 3; ++i)
        for (int r = 0; r < 3; ++r) out(p, i) += gv(r, p) * gradA_Deta(r, i);
    return out;
  }

  [[nodiscard]] Field C4v(const VectorField& v) const {
    const Mat3Field inner = velocity_chain(v);
    Field out(v[0].shape());
    for (int p = 0; p < 3; ++p)
      out -= cov_div(g, A, VectorField{inner(p, 0), inner(p, 1), inner(p, 2)}) * eta_k1()[static_cast<std::size_t>(p)];
    // + ([D^{k-2}, A^{lp} A^{nr}] D d_n eta_p) A^{mi} D d_m eta_r d_l v_i
    for (int i = 0; i < 3; ++i) {
      const VectorField dv = gradient(g, v[static_cast<std::size_t>(i)]);
      for (int l = 0; l < 3; ++l)
        for (int r = 0; r < 3; ++r)
          for (int m = 0; m < 3; ++m) out += T(l, r) * A(m, i) * X(r, m) * dv[static_cast<std::size_t>(l)];
    }
    return out;
  }

  [[nodiscard]] Field C6v(const VectorField& v) const {
    const Mat3Field inner = velocity_chain(v);
    Field out(v[0].shape());
    for (int r = 0; r < 3; ++r)
      out -= static_cast<double>(k - 1) * cov_div(g, A, VectorField{inner(r, 0), inner(r, 1), inner(r, 2)}) *
             eta_k1()[static_cast<std::size_t>(r)];
    return out;
  }

  // pressure-specific terms

  [[nodiscard]] VectorField C2Q(const Field& Q) const {
    return static_cast<double>(k) * contract_rows(g, dA[1], D(Q, k - 1));
  }

  [[nodiscard]] VectorField C4Q(const Field& Q) const {
    const VectorField dQ = gradient(g, Q);
    VectorField out = make_vector(Q.shape());
    const Mat3Field& Ak1 = dA[static_cast<std::size_t>(k - 1)];
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 3; ++l)
        for (int r = 0; r < 3; ++r)
          for (int m = 0; m < 3; ++m) out[static_cast<std::size_t>(i)] -= Ak1(l, r) * A(m, i) * X(r, m) * dQ[static_cast<std::size_t>(l)];
    return out;
  }

  [[nodiscard]] VectorField C6Q(const Field& Q) const {
    const VectorField gQ = cov_grad(g, A, Q);
    const Mat3Field Y = jacobian(g, eta_k1());
    VectorField out = make_vector(Q.shape());
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < 3; ++r)
        for (int m = 0; m < 3; ++m)
          out[static_cast<std::size_t>(i)] -= static_cast<double>(k - 1) * gQ[static_cast<std::size_t>(r)] * dA[1](m, i) * Y(r, m);
    return out;
  }
};

/// sum_i of component i of a generic term evaluated on f = v_i.
template <class Fn>
Field trace_over_velocity(const VectorField& v, Fn term) {
  Field out(v[0].shape());
  for (int i = 0; i < 3; ++i) out += term(v[static_cast<std::size_t>(i)])[static_cast<std::size_t>(i)];
  return out;
}

inline void require_tangential(int axis, int k) {
  if (axis < 0 || axis > 1) throw ConfigError("tangential decomposition needs axis 0 or 1");
  if (k < 3 || k > max_tangential_good_unknown_order) throw ConfigError("tangential decomposition order must be in [3, 8]");
}

}  // namespace detail

/// Remainder terms of D^k(div_A v) - div_A V*.
inline TangentialTerms tangential_terms_velocity(int axis, int k, const VectorField& eta, const VectorField& v,
                                                 const GeometrySnapshot& geo, const Grid& g) {
  detail::require_tangential(axis, k);
  const detail::TangentialContext ctx(g, axis, k, eta, geo);
  TangentialTerms t;
  auto generic = [&](auto member) { return std::vector<Field>{detail::trace_over_velocity(v, [&](const Field& f) { return (ctx.*member)(f); })}; };
  t.terms.emplace_back("C0", generic(&detail::TangentialContext::C0));
  t.terms.emplace_back("C1", generic(&detail::TangentialContext::C1));
  t.terms.emplace_back("C2", std::vector<Field>{ctx.C2v(v)});
  t.terms.emplace_back("C3", generic(&detail::TangentialContext::C3));
  t.terms.emplace_back("C4", std::vector<Field>{ctx.C4v(v)});
  t.terms.emplace_back("C5", generic(&detail::TangentialContext::C5));
  t.terms.emplace_back("C6", std::vector<Field>{ctx.C6v(v)});
  t.terms.emplace_back("E1", generic(&detail::TangentialContext::E1));
  return t;
}

/// Remainder terms of D^k(grad_A Q) - grad_A Q*.
inline TangentialTerms tangential_terms_pressure(int axis, int k, const VectorField& eta, const Field& Q, const GeometrySnapshot& geo,
                                                 const Grid& g) {
  detail::require_tangential(axis, k);
  const detail::TangentialContext ctx(g, axis, k, eta, geo);
  TangentialTerms t;
  t.terms.emplace_back("C0", detail::as_components(ctx.C0(Q)));
  t.terms.emplace_back("C1", detail::as_components(ctx.C1(Q)));
  t.terms.emplace_back("C2", detail::as_components(ctx.C2Q(Q)));
  t.terms.emplace_back("C3", detail::as_components(ctx.C3(Q)));
  t.terms.emplace_back("C4", detail::as_components(ctx.C4Q(Q)));
  t.terms.emplace_back("C5", detail::as_components(ctx.C5(Q)));
  t.terms.emplace_back("C6", detail::as_components(ctx.C6Q(Q)));
  t.terms.emplace_back("E1", detail::as_components(ctx.E1(Q)));
  return t;
}

/// lhs = D^k(div_A v) - div_A V*, rhs = assembled remainder (with or without E1).
inline GoodUnknownReport check_tangential_velocity(int axis, int k, const VectorField& eta, const VectorField& v, const Field& Q,
                                                   const GeometrySnapshot& geo, const Grid& g, bool include_e1 = true) {
  const ModifiedUnknowns mu = modified_good_unknowns(axis, k, eta, v, Q, geo, g);
  GoodUnknownReport rep;
  rep.name = include_e1 ? "tangential" : "tangential-printed-sum";
  rep.index = to_multi_index({axis, k});
  rep.field = "div v";
  rep.lhs = {detail::dpow(g, cov_div(g, geo.A, v), axis, k) - cov_div(g, geo.A, mu.V)};
  rep.rhs = tangential_terms_velocity(axis, k, eta, v, geo, g).sum(include_e1);
  return rep;
}

/// lhs = D^k(grad_A Q) - grad_A Q*, rhs = assembled remainder (with or without E1).
inline GoodUnknownReport check_tangential_pressure(int axis, int k, const VectorField& eta, const VectorField& v, const Field& Q,
                                                   const GeometrySnapshot& geo, const Grid& g, bool include_e1 = true) {
  const ModifiedUnknowns mu = modified_good_unknowns(axis, k, eta, v, Q, geo, g);
  GoodUnknownReport rep;
  rep.name = include_e1 ? "tangential" : "tangential-printed-sum";
  rep.index = to_multi_index({axis, k});
  rep.field = "grad Q";
  VectorField lhs = cov_grad(g, geo.A, Q);
  const VectorField gq = cov_grad(g, geo.A, mu.Q);
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    lhs[si] = detail::dpow(g, lhs[si], axis, k) - gq[si];
  }
  rep.lhs = detail::as_components(lhs);
  rep.rhs = tangential_terms_pressure(axis, k, eta, Q, geo, g).sum(include_e1);
  return rep;
}

// ---- boundary relations ----

struct BoundaryReduction {
  double vbdry = 0.0;  // ||A^{3i} d3 v_i + (J R'(q)/rho0) d_t q + sum_L A^{Li} d_L v_i||_{L2}
  double qbdry = 0.0;  // ||Ahat^{3i} d3 Q + sum_L Ahat^{Li} d_L Q + rho0 d_t v - (b0.d)(J^{-1}(b0.d) eta)||_{L2}
};

/// Both relations with every term recomputed; d_t q and d_t v come from the right-hand side.
inline BoundaryReduction boundary_reduction_check(const MaterialState& s, const GeometrySnapshot& geo, const Grid& g) {
  const RhsBundle r = rhs(s, g);
  const Field R = eos_density(s.q, s.eos);
  BoundaryReduction out;

  Field vb = geo.J * R * reciprocal(s.rho0) * r.d_q;
  for (int i = 0; i < 3; ++i) {
    const VectorField dv = gradient(g, s.v[static_cast<std::size_t>(i)]);
    vb += geo.A(2, i) * dv[2];
    for (int L = 0; L < 2; ++L) vb += geo.A(L, i) * dv[static_cast<std::size_t>(L)];
  }
  out.vbdry = g.l2_norm(vb);

  const VectorField b = magnetic_field(s, geo);
  const Field Q = total_pressure(s, geo);
  const VectorField dQ = gradient(g, Q);
  VectorField qb;
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    Field c = geo.Ahat(2, i) * dQ[2];
    for (int L = 0; L < 2; ++L) c += geo.Ahat(L, i) * dQ[static_cast<std::size_t>(L)];
    c += s.rho0 * r.d_v[si];
    const VectorField db = gradient(g, b[si]);
    c -= s.b0[0] * db[0] + s.b0[1] * db[1] + s.b0[2] * db[2];
    qb[si] = std::move(c);
  }
  out.qbdry = g.l2_norm(qb);
  return out;
}

}  // namespace fbmhd
