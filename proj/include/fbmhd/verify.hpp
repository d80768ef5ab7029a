#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbmhd/config.hpp"
#include "fbmhd/goodunknown.hpp"
#include "fbmhd/initdata.hpp"
#include "fbmhd/norms.hpp"
#include "fbmhd/tensor.hpp"

namespace fbmhd {

/// Least-squares slope of log(err) against log(h) with the plateau rule: values at or below
/// `floor` are dropped, and if fewer than two remain the fit is flagged "floor" and passes.
struct OrderFit {
  std::vector<double> h;
  std::vector<double> err;
  double expected = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();
  bool floor = false;
  bool passed = false;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j = {{"h", h}, {"err", err}, {"expected_order", expected}, {"floor", floor}, {"passed", passed}};
    j["order"] = std::isnan(order) ? nlohmann::json(nullptr) : nlohmann::json(order);
    return j;
  }
};

inline constexpr double default_floor = 1e-12;

inline OrderFit fit_order(std::vector<double> h, std::vector<double> err, double expected, double floor = default_floor) {
  if (h.size() != err.size()) throw std::invalid_argument("fit_order: size mismatch");
  if (h.size() < 3) throw ConfigError("convergence study needs >= 3 levels");
  OrderFit f{std::move(h), std::move(err), expected};
  std::vector<double> x, y;
  for (std::size_t i = 0; i < f.h.size(); ++i) {
    if (!std::isfinite(f.err[i])) return f;  // fails
    if (f.err[i] > floor) {
      x.push_back(std::log(f.h[i]));
      y.push_back(std::log(f.err[i]));
    }
  }
  if (x.size() < 2) {
    f.floor = true;
    f.passed = true;
    return f;
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  f.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.passed = f.order >= expected;
  return f;
}

/// One named check: either a value against a tolerance or an order fit.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  nlohmann::json detail;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j = {{"name", name}, {"passed", passed}};
    if (detail.is_null()) {
      j["value"] = value;
      j["tolerance"] = tolerance;
    } else {
      j["fit"] = detail;
    }
    return j;
  }
};

inline Check bound_check(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance, nullptr};
}

inline Check order_check(std::string name, const OrderFit& fit) {
  return {std::move(name), fit.order, fit.expected, fit.passed, fit.to_json()};
}

struct VerifyReport {
  std::string suite;
  std::vector<Check> checks;

  [[nodiscard]] bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j = {{"suite", suite}, {"passed", passed()}, {"checks", nlohmann::json::array()}};
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    return j;
  }
};

// ---- test fields ----

/// Identity plus band-limited displacement (peak amp per component).
inline VectorField perturbed_map(const Grid& g, double amp, unsigned seed, int kmax) {
  VectorField eta = identity_map(g);
  for (int i = 0; i < 3; ++i) eta[static_cast<std::size_t>(i)] += band_limited_field(g, amp, seed + 31 * static_cast<unsigned>(i), kmax);
  return eta;
}

/// Identity plus a displacement depending on (y1, y2) only.
inline VectorField tangential_map(const Grid& g, double amp, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr double pi = std::numbers::pi;
  VectorField eta = identity_map(g);
  for (int i = 0; i < 3; ++i) {
    const int k1 = static_cast<int>(rng() % 3) - 1, k2 = static_cast<int>(rng() % 3);
    const double phase = pi * u(rng);
    eta[static_cast<std::size_t>(i)] += g.sample([&](double y1, double y2, double) { return amp * std::sin(2 * pi * (k1 * y1 + k2 * y2) + phase); });
  }
  return eta;
}

// ---- suites ----

namespace detail {

inline std::vector<int> normal_levels() { return {17, 33, 65}; }

inline OrderFit normal_study(const std::function<double(const Grid&)>& residual, int n_tan, double expected) {
  std::vector<double> h, e;
  for (int n3 : normal_levels()) {
    const Grid g = build_grid(n_tan, n_tan, n3, Mode::slab);
    h.push_back(g.spacing(2));
    e.push_back(residual(g));
  }
  return fit_order(h, e, expected);
}

/// Direct count of indices with weight <= m by scanning the full box [0, m]^5.
inline std::size_t brute_force_count(int m, bool with_time) {
  std::size_t n = 0;
  for (int a = 0; a <= m; ++a)
    for (int b = 0; b <= m; ++b)
      for (int c = 0; c <= m; ++c)
        for (int d = 0; d <= m; ++d)
          for (int e = 0; e <= m; ++e)
            if ((with_time || a == 0) && a + b + c + 2 * d + e <= m) ++n;
  return n;
}

}  // namespace detail

inline VerifyReport verify_geometry(const RunConfig& cfg) {
  VerifyReport rep{"geometry", {}};
  {
    const Grid g = build_grid(16, 16, 17, Mode::slab);
    const GeometrySnapshot geo = geometry(identity_map(g), g);
    rep.checks.push_back(bound_check("identity: max |d_l Ahat^{li}|", max_abs(piola_residual(geo, g)), 1e-12));
    rep.checks.push_back(bound_check("identity: max |J - 1|", max_abs(geo.J - 1.0), 1e-14));
    rep.checks.push_back(bound_check("identity: inverse defect", inverse_defect(geo), 1e-14));
  }
  rep.checks.push_back(order_check("piola, normal refinement", detail::normal_study(
                                                                   [&](const Grid& g) {
                                                                     return max_abs(piola_residual(geometry(perturbed_map(g, 0.05, cfg.seed, 2), g), g));
                                                                   },
                                                                   12, 3.5)));
  {
    const Grid g = build_grid(16, 16, 17, Mode::slab);
    rep.checks.push_back(bound_check("piola, tangential-only perturbation", max_abs(piola_residual(geometry(tangential_map(g, 0.05, cfg.seed), g), g)), 1e-9));
    const Grid t = build_grid(16, 16, 16, Mode::torus);
    rep.checks.push_back(bound_check("piola, torus", max_abs(piola_residual(geometry(perturbed_map(t, 0.05, cfg.seed, 2), t), t)), 1e-9));
  }
  rep.checks.push_back(order_check("d3 A = -A d3(d eta) A, normal refinement",
                                   detail::normal_study([&](const Grid& g) { return max_abs(variation_identity_residual(perturbed_map(g, 0.05, cfg.seed, 2), 2, g)); },
                                                        8, 3.5)));
  return rep;
}

inline VerifyReport verify_goodunknown(const RunConfig& cfg) {
  VerifyReport rep{"goodunknown", {}};
  const double corrupt = cfg.corrupt_a;
  auto geometry_of = [&](const VectorField& eta, const Grid& g) {
    GeometrySnapshot geo = geometry(eta, g);
    if (corrupt != 0.0) geo.A(0, 0) += corrupt;
    return geo;
  };
  for (int axis = 0; axis < 3; ++axis) {
    const OrderFit fit = detail::normal_study(
        [&](const Grid& g) {
          const VectorField eta = perturbed_map(g, 0.05, cfg.seed, 1);
          const Field f = band_limited_field(g, 1.0, cfg.seed + 7, 1);
          return first_order_identity(axis, f, eta, geometry_of(eta, g), g).residual_l2(g);
        },
        16, 3.5);
    rep.checks.push_back(order_check("first-order identity, D = d" + std::to_string(axis + 1), fit));
  }
  rep.checks.push_back(order_check("d3^2 decomposition", detail::normal_study(
                                                             [&](const Grid& g) {
                                                               const VectorField eta = perturbed_map(g, 0.05, cfg.seed, 1);
                                                               const Field f = band_limited_field(g, 1.0, cfg.seed + 7, 1);
                                                               return check_standard_decomposition({0, 0, 0, 2, 0}, f, eta, geometry_of(eta, g), g)
                                                                   .residual_l2(g);
                                                             },
                                                             16, 3.5)));
  {
    const int k = cfg.tangential_order;
    // Low orders on a 32^3 torus (spectral in every direction): on a slab the normal stencil
    // error is not small against D^k of a band-limited field until k is large.
    const Grid g = k <= 5 ? build_grid(32, 32, 32, Mode::torus) : build_grid(32, 32, 65, Mode::slab);
    const VectorField eta = perturbed_map(g, 0.02, cfg.seed, 2);
    const VectorField v = {band_limited_field(g, 1.0, cfg.seed + 1, 2), band_limited_field(g, 1.0, cfg.seed + 2, 2),
                           band_limited_field(g, 1.0, cfg.seed + 3, 2)};
    const Field Q = band_limited_field(g, 1.0, cfg.seed + 4, 2);
    const GeometrySnapshot geo = geometry_of(eta, g);
    const std::string tag = "d1^" + std::to_string(k);
    rep.checks.push_back(bound_check(tag + " modified velocity decomposition (relative)", check_tangential_velocity(0, k, eta, v, Q, geo, g).relative(g), 1e-6));
    rep.checks.push_back(bound_check(tag + " modified pressure decomposition (relative)", check_tangential_pressure(0, k, eta, v, Q, geo, g).relative(g), 1e-6));
  }
  return rep;
}

inline VerifyReport verify_norms(const RunConfig& cfg) {
  VerifyReport rep{"norms", {}};
  double worst_count = 0.0;
  for (int m = 0; m <= max_norm_order; ++m)
    for (bool with_time : {false, true})
      worst_count = std::max(worst_count, std::abs(static_cast<double>(enumerate_indices(m, with_time).size()) -
                                                   static_cast<double>(detail::brute_force_count(m, with_time))));
  rep.checks.push_back(bound_check("index counts m <= 8 vs brute force", worst_count, 0.0));

  const Grid g = build_grid(16, 16, 17, Mode::slab);
  const Field f = band_limited_field(g, 1.0, cfg.seed, 2);
  double homog = 0.0, nest = 0.0;
  for (int m = 0; m <= 4; ++m) {
    const double n = aniso_norm(f, m, g);
    homog = std::max(homog, std::abs(aniso_norm(-2.5 * f, m, g) - 2.5 * n) / n);
    if (m > 0) nest = std::max(nest, aniso_norm(f, m - 1, g) - n);
  }
  rep.checks.push_back(bound_check("homogeneity ||c f|| = |c| ||f||, m <= 4 (relative)", homog, 1e-12));
  rep.checks.push_back(bound_check("nesting ||f||_{m-1} - ||f||_m, m <= 4", std::max(0.0, nest), 1e-12));
  rep.checks.push_back(bound_check("weighted normal derivative on the boundary", max_abs(boundary_restriction(g, g.d_wnor(f))), 0.0));
  return rep;
}

inline VerifyReport verify_initdata(const RunConfig& cfg) {
  VerifyReport rep{"initdata", {}};
  const Grid g = build_grid(24, 24, 33, Mode::slab);
  Recipe r;
  r.name = "smooth";
  r.beta = 0.5;
  r.psi_amp = 0.05;
  r.v_amp = 0.05;
  r.q_amp = 0.1;
  r.seed = cfg.seed;
  const VectorField b0 = make_b0(r, g);
  rep.checks.push_back(bound_check("max |div b0|", max_abs(divergence(b0, g)), 1e-10));
  rep.checks.push_back(bound_check("max |b0^3| on the boundary", max_abs(boundary_restriction(g, b0[2])), 0.0));

  Recipe st;
  st.name = "static";
  st.beta = 0.5;
  const Jet still = jet_recursion(make_recipe_state(st, g), 3, g);
  double moving = 0.0;
  for (int j = 1; j <= 3; ++j) moving = std::max({moving, max_abs(still.velocity(j)), max_abs(still.pressure(j))});
  rep.checks.push_back(bound_check("static equilibrium: jets of order 1..3", moving, 1e-12));

  const MaterialState p = project_compatible(make_recipe_state(r, g), 3, g);
  const auto res = compatibility_residuals(jet_recursion(p, 3, g), g);
  rep.checks.push_back(bound_check("projected k = 3: max_j |Q_(j)|_{L2(Gamma)}", *std::max_element(res.begin(), res.end()), 1e-8));

  const double eps = 1e-3;
  MaterialState bad = p;
  bad.q += eps;
  const double r0 = compatibility_residuals(jet_recursion(bad, 0, g), g).front();
  const double area = g.boundary_integrate(Field(g.shape(), 1.0));
  rep.checks.push_back(bound_check("Q0 + eps: relative error of the j = 0 residual vs eps sqrt|Gamma|", std::abs(r0 / (eps * std::sqrt(area)) - 1.0), 0.01));
  return rep;
}

inline std::vector<VerifyReport> run_suite(const RunConfig& cfg, const std::string& suite) {
  std::vector<VerifyReport> out;
  const bool all = suite == "all";
  if (all || suite == "geometry") out.push_back(verify_geometry(cfg));
  if (all || suite == "goodunknown") out.push_back(verify_goodunknown(cfg));
  if (all || suite == "norms") out.push_back(verify_norms(cfg));
  if (all || suite == "initdata") out.push_back(verify_initdata(cfg));
  if (out.empty()) throw ConfigError("unknown suite '" + suite + "'");
  return out;
}

}  // namespace fbmhd
