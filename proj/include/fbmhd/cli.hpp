#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbmhd/config.hpp"
#include "fbmhd/diagnostics.hpp"
#include "fbmhd/dynamics.hpp"
#include "fbmhd/initdata.hpp"
#include "fbmhd/io.hpp"
#include "fbmhd/verify.hpp"

namespace fbmhd {

/// Recipe state, projected to the configured compatibility order when one is set.
inline MaterialState make_run_state(const RunConfig& cfg, const Grid& g, ProjectionReport* report = nullptr) {
  MaterialState s = make_recipe_state(cfg.recipe, g);
  if (cfg.compat_order >= 0) {
    ProjectionOptions opt;
    opt.taylor_c0 = cfg.taylor_c0;
    s = project_compatible(s, cfg.compat_order, g, opt, report);
  }
  return s;
}

inline EvolveOptions evolve_options(const RunConfig& cfg) {
  EvolveOptions o;
  o.step.cfl = cfg.cfl;
  o.step.jacobian_floor = cfg.jacobian_floor;
  o.step.filter = cfg.filter;
  o.coevolve_b = cfg.coevolve_b;
  return o;
}

inline MonitorOptions monitor_options(const RunConfig& cfg) {
  MonitorOptions m;
  m.energy_order = cfg.energy_order;
  m.energy_every = cfg.energy_every;
  m.apriori.jacobian_limit = cfg.jacobian_limit;
  m.apriori.c0 = cfg.taylor_c0;
  return m;
}

inline std::string out_path(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

inline nlohmann::json report_header(const RunConfig& cfg, const std::string& command) {
  return {{"command", command}, {"config_hash", config_hash(cfg)}, {"config", to_json(cfg)}};
}

struct RunOutcome {
  std::vector<DiagnosticsRecord> records;
  nlohmann::json summary;
};

/// Evolves the configured state, writing series.csv, summary.json, final.{json,bin} and
/// optional snap_NNNNNN.{json,bin} to `out_dir`.
inline RunOutcome cmd_run(const RunConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  ensure_directory(out_dir);
  const std::string hash = config_hash(cfg);
  const Grid g = make_grid(cfg);
  ProjectionReport proj;
  const MaterialState s0 = make_run_state(cfg, g, &proj);
  SeriesWriter series(out_path(out_dir, "series.csv"), "config_hash=" + hash);
  const MonitorOptions mon = monitor_options(cfg);
  const EvolveResult res = evolve(s0, cfg.t_end, cfg.dt, g, evolve_options(cfg), [&](const StepContext& c) {
    const DiagnosticsRecord r = measure(c, g, mon);
    series.append(r);
    if (cfg.snapshot_every > 0 && c.step % cfg.snapshot_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06d", c.step);
      write_state_snapshot(out_path(out_dir, name), *c.state, g, hash);
    }
    if (cfg.halt_on_violation && !r.apriori_ok)
      throw NumericsError("a priori assumption violated at step " + std::to_string(c.step));
  });
  write_state_snapshot(out_path(out_dir, "final"), res.state, g, hash);

  RunOutcome out;
  out.records = series.records();
  out.summary = report_header(cfg, "run");
  out.summary["steps"] = res.steps;
  out.summary["dt"] = res.dt;
  out.summary["projection_iterations"] = cfg.compat_order >= 0 ? nlohmann::json(proj.iterations) : nlohmann::json(nullptr);
  out.summary["series"] = series_summary(out.records, series.first_violation());
  write_json(out_path(out_dir, "summary.json"), out.summary);
  return out;
}

/// Runs the named suite(s); writes verify_<suite>.json. Returns false if any check fails.
inline bool cmd_verify(const RunConfig& cfg, const std::string& suite, const std::string& out_dir, nlohmann::json* report = nullptr) {
  validate(cfg);
  ensure_directory(out_dir);
  nlohmann::json j = report_header(cfg, "verify");
  j["suite"] = suite;
  j["reports"] = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : run_suite(cfg, suite)) {
    ok = ok && r.passed();
    j["reports"].push_back(r.to_json());
  }
  j["passed"] = ok;
  write_json(out_path(out_dir, "verify_" + suite + ".json"), j);
  if (report) *report = j;
  return ok;
}

/// Convergence study along `axis` (dt | n3 | n_tan) with `levels` refinements, or over
/// existing series files when `inputs` is non-empty. Writes converge_<axis>.json.
inline bool cmd_converge(const RunConfig& cfg, const std::string& axis, int levels, const std::string& out_dir,
                         const std::vector<std::string>& inputs = {}, nlohmann::json* report = nullptr) {
  validate(cfg);
  const int n_levels = inputs.empty() ? levels : static_cast<int>(inputs.size());
  if (n_levels < 3) throw ConfigError("convergence study needs >= 3 levels");
  ensure_directory(out_dir);

  std::vector<std::pair<std::string, OrderFit>> fits;
  std::string used_axis = axis;
  if (!inputs.empty()) {
    used_axis = "series";
    std::vector<double> h, drift, frozen, jt;
    for (const auto& path : inputs) {
      const SeriesTable t = read_series(path);
      const auto time = t.column("t");
      const auto e = t.column("e_total");
      if (time.size() < 2) throw IoError(path + " has fewer than two records");
      h.push_back(time[1] - time[0]);
      drift.push_back(std::abs(e.back() - e.front()) / (e.front() != 0.0 ? std::abs(e.front()) : 1.0));
      frozen.push_back(t.column("frozen_field_residual").back());
      double worst = 0.0;
      for (double x : t.column("j_transport_residual"))
        if (std::isfinite(x)) worst = std::max(worst, x);
      jt.push_back(worst);
    }
    fits.emplace_back("relative energy drift", fit_order(h, drift, 3.5));
    if (std::isfinite(frozen.front())) fits.emplace_back("frozen-field residual", fit_order(h, frozen, 3.5));
    fits.emplace_back("J transport residual", fit_order(h, jt, 1.8));
  } else if (axis == "dt") {
    const Grid g = make_grid(cfg);
    const MaterialState s0 = make_run_state(cfg, g);
    std::vector<double> h, drift, frozen, jt;
    for (int i = 0; i < levels; ++i) {
      std::vector<DiagnosticsRecord> rs;
      const EvolveResult res =
          evolve(s0, cfg.t_end, cfg.dt / std::pow(2.0, i), g, evolve_options(cfg), [&](const StepContext& c) { rs.push_back(measure(c, g)); });
      h.push_back(res.dt);
      drift.push_back(relative_energy_drift(rs));
      frozen.push_back(rs.back().frozen_field_residual);
      double worst = 0.0;
      for (const auto& r : rs)
        if (std::isfinite(r.j_transport_residual)) worst = std::max(worst, r.j_transport_residual);
      jt.push_back(worst);
    }
    // the semi-discrete slab system is not exactly conservative, so drift is only fitted on the torus
    if (!g.slab()) fits.emplace_back("relative energy drift", fit_order(h, drift, 3.5));
    if (cfg.coevolve_b) fits.emplace_back("frozen-field residual", fit_order(h, frozen, 3.5));
    fits.emplace_back("J transport residual", fit_order(h, jt, 1.8));
  } else if (axis == "n3") {
    if (cfg.mode != Mode::slab) throw ConfigError("n3 refinement requires slab mode");
    std::vector<double> h, piola, first;
    for (int i = 0; i < levels; ++i) {
      const Grid g = build_grid(cfg.n1, cfg.n2, (cfg.n3 - 1) * (1 << i) + 1, Mode::slab);
      h.push_back(g.spacing(2));
      piola.push_back(max_abs(piola_residual(geometry(perturbed_map(g, 0.05, cfg.seed, 2), g), g)));
      const VectorField eta = perturbed_map(g, 0.05, cfg.seed, 1);
      first.push_back(first_order_identity(2, band_limited_field(g, 1.0, cfg.seed + 7, 1), eta, geometry(eta, g), g).residual_l2(g));
    }
    fits.emplace_back("piola residual", fit_order(h, piola, 3.5));
    fits.emplace_back("first-order good-unknown identity, d3", fit_order(h, first, 3.5));
  } else if (axis == "n_tan") {
    std::vector<double> h, piola;
    for (int i = 0; i < levels; ++i) {
      const Grid g = build_grid(cfg.n1 << i, cfg.n2 << i, cfg.n3, cfg.mode);
      h.push_back(g.spacing(0));
      piola.push_back(max_abs(piola_residual(geometry(tangential_map(g, 0.05, cfg.seed), g), g)));
    }
    fits.emplace_back("piola residual, tangential-only map", fit_order(h, piola, 3.5));
  } else {
    throw ConfigError("unknown convergence axis '" + axis + "' (dt | n3 | n_tan)");
  }

  nlohmann::json j = report_header(cfg, "converge");
  j["axis"] = used_axis;
  if (!inputs.empty()) j["inputs"] = inputs;
  j["monitors"] = nlohmann::json::array();
  bool ok = true;
  for (const auto& [name, fit] : fits) {
    nlohmann::json m = fit.to_json();
    m["name"] = name;
    j["monitors"].push_back(m);
    ok = ok && fit.passed;
  }
  j["passed"] = ok;
  write_json(out_path(out_dir, "converge_" + used_axis + ".json"), j);
  if (report) *report = j;
  return ok;
}

/// Builds the configured initial data, its jet to `order` and the compatibility residuals.
/// Writes initial.{json,bin}, jet.{json,bin} and initdata.json.
inline nlohmann::json cmd_initdata(const RunConfig& cfg, int order, const std::string& out_dir) {
  validate(cfg);
  if (order < 0 || order > max_jet_order) throw ConfigError("jet order must be in [0, 8]");
  ensure_directory(out_dir);
  const std::string hash = config_hash(cfg);
  const Grid g = make_grid(cfg);
  ProjectionReport proj;
  const MaterialState s = make_run_state(cfg, g, &proj);
  const Jet jet = jet_recursion(s, order, g, cfg.jacobian_floor);
  write_state_snapshot(out_path(out_dir, "initial"), s, g, hash);
  write_jet_snapshot(out_path(out_dir, "jet"), jet, g, hash);

  nlohmann::json j = report_header(cfg, "initdata");
  j["jet_order"] = order;
  j["max_div_b0"] = max_abs(divergence(s.b0, g));
  if (g.slab()) {
    j["compatibility_residuals"] = compatibility_residuals(jet, g);
    j["taylor_sign"] = taylor_sign(total_pressure(s, geometry(s.eta, g)), g);
    j["max_boundary_b0_normal"] = max_abs(boundary_restriction(g, s.b0[2]));
  }
  j["projection_iterations"] = cfg.compat_order >= 0 ? nlohmann::json(proj.iterations) : nlohmann::json(nullptr);
  write_json(out_path(out_dir, "initdata.json"), j);
  return j;
}

}  // namespace fbmhd
