#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbmhd/dynamics.hpp"
#include "fbmhd/errors.hpp"
#include "fbmhd/initdata.hpp"
#include "fbmhd/norms.hpp"
#include "fbmhd/state.hpp"

namespace fbmhd {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

struct PhysicalEnergy {
  double kinetic = 0.0;
  double magnetic = 0.0;
  double internal = 0.0;
  double total = 0.0;
};

/// Lagrangian form of the conserved energy (dx = J dy, rho J = rho0):
///   1/2 int rho0 |v|^2 + 1/2 int J |b|^2 + int rho0 Q(R).
inline PhysicalEnergy physical_energy(const MaterialState& s, const GeometrySnapshot& geo, const Grid& g) {
  const VectorField b = magnetic_field(s, geo);
  const Field R = eos_density(s.q, s.eos);
  PhysicalEnergy e;
  e.kinetic = 0.5 * g.integrate(s.rho0 * dot(s.v, s.v));
  e.magnetic = 0.5 * g.integrate(geo.J * dot(b, b));
  e.internal = g.integrate(s.rho0 * map(R, [&](double r) { return s.eos.internal_energy(r); }));
  e.total = e.kinetic + e.magnetic + e.internal;
  return e;
}

/// min over Gamma of -dQ/dN for the state's total pressure.
inline double taylor_sign(const MaterialState& s, const GeometrySnapshot& geo, const Grid& g) {
  return taylor_sign(total_pressure(s, geo), g);
}

struct AprioriOptions {
  double jacobian_limit = 0.25;
  double c0 = 0.1;  // Taylor sign must stay >= 3/4 c0
};

struct AprioriFlags {
  double j_max = 0.0;        // max |J - 1|
  double j_h2 = 0.0;         // ||J - 1||_{H^2_*}
  double taylor = nan_value;  // slab only
  bool jacobian_ok = true;
  bool taylor_ok = true;
  [[nodiscard]] bool ok() const noexcept { return jacobian_ok && taylor_ok; }
};

/// Reduced-order stand-in for ||J - 1||_{7,*} <= 1/4 plus the Taylor sign bound -dQ/dN >= 3 c0 / 4.
inline AprioriFlags apriori_monitor(const MaterialState& s, const GeometrySnapshot& geo, const Grid& g, const AprioriOptions& opt = {}) {
  AprioriFlags f;
  const Field d = geo.J - 1.0;
  f.j_max = max_abs(d);
  f.j_h2 = aniso_norm(d, 2, g);
  f.jacobian_ok = f.j_max <= opt.jacobian_limit && f.j_h2 <= opt.jacobian_limit;
  if (g.slab()) {
    f.taylor = taylor_sign(s, geo, g);
    f.taylor_ok = f.taylor >= 0.75 * opt.c0;
  }
  return f;
}

struct DiagnosticsRecord {
  int step = 0;
  double t = 0.0;
  double e_kin = 0.0;
  double e_mag = 0.0;
  double e_int = 0.0;
  double e_total = 0.0;
  double div_b0_residual = 0.0;
  double j_drift = 0.0;
  double q_boundary_drift = nan_value;
  double taylor_sign_min = nan_value;
  double normal_flux_residual = nan_value;
  double frozen_field_residual = nan_value;
  double rho0_rj_residual = 0.0;
  double j_transport_residual = nan_value;
  double energy_functional = nan_value;
  bool apriori_ok = true;

  static std::vector<std::string> columns() {
    return {"step",           "t",
            "e_kin",          "e_mag",
            "e_int",          "e_total",
            "div_b0_residual", "j_drift",
            "q_boundary_drift", "taylor_sign_min",
            "normal_flux_residual", "frozen_field_residual",
            "rho0_rj_residual", "j_transport_residual",
            "energy_functional", "apriori_ok"};
  }
  [[nodiscard]] std::vector<double> values() const {
    return {static_cast<double>(step), t, e_kin, e_mag, e_int, e_total, div_b0_residual, j_drift, q_boundary_drift, taylor_sign_min,
            normal_flux_residual, frozen_field_residual, rho0_rj_residual, j_transport_residual, energy_functional,
            apriori_ok ? 1.0 : 0.0};
  }
};

struct MonitorOptions {
  int energy_order = -1;  // < 0 disables the energy functional
  int energy_every = 1;
  AprioriOptions apriori;
};

/// Every monitor for one step of a run.
inline DiagnosticsRecord measure(const StepContext& c, const Grid& g, const MonitorOptions& opt = {}) {
  const MaterialState& s = *c.state;
  const GeometrySnapshot& geo = *c.geometry;
  DiagnosticsRecord r;
  r.step = c.step;
  r.t = s.t;
  const PhysicalEnergy e = physical_energy(s, geo, g);
  r.e_kin = e.kinetic;
  r.e_mag = e.magnetic;
  r.e_int = e.internal;
  r.e_total = e.total;
  r.div_b0_residual = max_abs(divergence(s.b0, g));
  r.j_drift = max_abs(geo.J - 1.0);
  const Field Q = total_pressure(s, geo);
  if (g.slab()) {
    r.q_boundary_drift = g.boundary_l2_norm(Q);
    r.taylor_sign_min = taylor_sign(Q, g);
    r.normal_flux_residual = normal_flux_residual(s, geo, g);
  }
  if (c.b_evolved) r.frozen_field_residual = g.l2_norm(*c.b_evolved - magnetic_field(s, geo));
  r.rho0_rj_residual = max_abs(density_compatibility_residual(s, geo));
  r.j_transport_residual = c.j_transport_residual;
  if (opt.energy_order >= 0 && c.step % std::max(1, opt.energy_every) == 0) {
    const Jet jet = jet_recursion(s, opt.energy_order, g);
    r.energy_functional = energy_functional(jet, geo.A, opt.energy_order, g).total();
  }
  r.apriori_ok = apriori_monitor(s, geo, g, opt.apriori).ok();
  return r;
}

/// Append-only CSV time series, flushed after every record. A non-empty `comment` goes on a
/// leading '#' line (used for the config hash).
class SeriesWriter {
 public:
  SeriesWriter() = default;
  explicit SeriesWriter(const std::string& path, const std::string& comment = "") : out_(path) {
    if (!out_) throw IoError("cannot open series file " + path);
    if (!comment.empty()) out_ << "# " << comment << '\n';
    const auto cols = DiagnosticsRecord::columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
    flush();
  }

  void append(const DiagnosticsRecord& r) {
    records_.push_back(r);
    if (!r.apriori_ok && !first_violation_) first_violation_ = r.step;
    if (!out_.is_open()) return;
    const auto vals = r.values();
    out_.precision(17);
    for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << vals[i];
    out_ << '\n';
    flush();
  }

  [[nodiscard]] const std::vector<DiagnosticsRecord>& records() const noexcept { return records_; }
  [[nodiscard]] std::optional<int> first_violation() const noexcept { return first_violation_; }

 private:
  void flush() {
    out_.flush();
    if (!out_) throw IoError("write to series file failed");
  }

  std::ofstream out_;
  std::vector<DiagnosticsRecord> records_;
  std::optional<int> first_violation_;
};

/// |E_total(t) - E_total(0)| / |E_total(0)| at the last record.
inline double relative_energy_drift(const std::vector<DiagnosticsRecord>& rs) {
  if (rs.size() < 2) return 0.0;
  const double e0 = rs.front().e_total;
  return std::abs(rs.back().e_total - e0) / (e0 != 0.0 ? std::abs(e0) : 1.0);
}

/// Min / max of every column plus the drift and the first a priori violation.
inline nlohmann::json series_summary(const std::vector<DiagnosticsRecord>& rs, std::optional<int> first_violation = std::nullopt) {
  nlohmann::json j;
  j["records"] = rs.size();
  const auto cols = DiagnosticsRecord::columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : rs) {
      const double x = r.values()[c];
      if (std::isnan(x)) continue;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (lo <= hi) j["columns"][cols[c]] = {{"min", lo}, {"max", hi}};
  }
  j["relative_energy_drift"] = relative_energy_drift(rs);
  j["first_apriori_violation"] = first_violation ? nlohmann::json(*first_violation) : nlohmann::json(nullptr);
  return j;
}

}  // namespace fbmhd
