// Command-line driver: run | verify | converge | initdata.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbmhd/fbmhd.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::string suite;
  std::string axis = "dt";
  int levels = 3;
  int order = -1;
  std::vector<std::string> inputs;
};

fbmhd::RunConfig load(const Args& a) { return a.config.empty() ? fbmhd::RunConfig{} : fbmhd::load_config(a.config); }

std::string out_dir(const Args& a, const fbmhd::RunConfig& cfg) { return a.out.empty() ? cfg.out_dir : a.out; }

int code(fbmhd::ExitCode c) { return static_cast<int>(c); }

void print_checks(const nlohmann::json& report) {
  for (const auto& r : report["reports"])
    for (const auto& c : r["checks"]) {
      const std::string status = c["passed"].get<bool>() ? "ok  " : "FAIL";
      std::printf("%s [%s] %s", status.c_str(), r["suite"].get<std::string>().c_str(), c["name"].get<std::string>().c_str());
      if (c.contains("fit")) {
        const auto& f = c["fit"];
        if (f["floor"].get<bool>())
          std::printf("  (floor)\n");
        else
          std::printf("  order %.2f (expected >= %.1f)\n", f["order"].is_null() ? 0.0 : f["order"].get<double>(), f["expected_order"].get<double>());
      } else {
        std::printf("  %.3e (tol %.1e)\n", c["value"].get<double>(), c["tolerance"].get<double>());
      }
    }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fbmhd;
  CLI::App app{"Lagrangian free-boundary compressible MHD laboratory"};
  app.require_subcommand(1);
  Args a;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", a.config, "INI config file (defaults if omitted)");
    sub->add_option("--out", a.out, "output directory (overrides output.dir)");
  };
  CLI::App* run = app.add_subcommand("run", "evolve the configured state and record diagnostics");
  common(run);
  run->add_option("--order", a.order, "energy functional order (overrides diagnostics.energy_order)");

  CLI::App* verify = app.add_subcommand("verify", "identity and construction checks");
  common(verify);
  verify->add_option("--suite", a.suite, "geometry | goodunknown | norms | initdata | all");
  verify->add_option("--order", a.order, "tangential good-unknown order (overrides verify.tangential_order)");

  CLI::App* converge = app.add_subcommand("converge", "refinement study with log-log slope fits");
  common(converge);
  converge->add_option("--axis", a.axis, "dt | n3 | n_tan");
  converge->add_option("--levels", a.levels, "number of refinement levels (>= 3)");
  converge->add_option("--inputs", a.inputs, "series.csv files from runs at different dt")->delimiter(',');

  CLI::App* initdata = app.add_subcommand("initdata", "build initial data and its time-derivative jet");
  common(initdata);
  initdata->add_option("--order", a.order, "jet order (default: compatibility order, at least 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return code(ExitCode::config);
  }

  try {
    RunConfig cfg = load(a);
    if (*run) {
      if (a.order >= 0) cfg.energy_order = a.order;
      const RunOutcome r = cmd_run(cfg, out_dir(a, cfg));
      const auto& s = r.summary["series"];
      std::printf("run: %d steps, relative energy drift %.3e, first a priori violation: %s\n", r.summary["steps"].get<int>(),
                  s["relative_energy_drift"].get<double>(), s["first_apriori_violation"].dump().c_str());
      return code(ExitCode::ok);
    }
    if (*verify) {
      if (!a.suite.empty()) cfg.suite = a.suite;
      if (a.order >= 0) cfg.tangential_order = a.order;
      nlohmann::json report;
      const bool ok = cmd_verify(cfg, cfg.suite, out_dir(a, cfg), &report);
      print_checks(report);
      std::printf("verify %s: %s\n", cfg.suite.c_str(), ok ? "passed" : "FAILED");
      return code(ok ? ExitCode::ok : ExitCode::verification);
    }
    if (*converge) {
      nlohmann::json report;
      const bool ok = cmd_converge(cfg, a.axis, a.levels, out_dir(a, cfg), a.inputs, &report);
      for (const auto& m : report["monitors"]) {
        std::printf("%s %s: ", m["passed"].get<bool>() ? "ok  " : "FAIL", m["name"].get<std::string>().c_str());
        if (m["floor"].get<bool>())
          std::printf("floor\n");
        else
          std::printf("order %.2f (expected >= %.1f)\n", m["order"].is_null() ? 0.0 : m["order"].get<double>(), m["expected_order"].get<double>());
      }
      return code(ok ? ExitCode::ok : ExitCode::verification);
    }
    if (*initdata) {
      const int order = a.order >= 0 ? a.order : std::max(1, cfg.compat_order);
      const nlohmann::json j = cmd_initdata(cfg, order, out_dir(a, cfg));
      std::printf("%s\n", j.dump(2).c_str());
      return code(ExitCode::ok);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code(e.code());
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code(ExitCode::config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return code(ExitCode::ok);
}
