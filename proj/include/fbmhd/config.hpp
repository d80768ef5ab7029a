#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "fbmhd/errors.hpp"
#include "fbmhd/grid.hpp"
#include "fbmhd/initdata.hpp"

namespace fbmhd {

/// Everything a run, verification or convergence study reads from its INI file.
struct RunConfig {
  // [grid]
  int n1 = 16, n2 = 16, n3 = 17;
  Mode mode = Mode::slab;
  // [time]
  double dt = 0.005;
  double t_end = 0.02;
  double cfl = 0.25;
  double jacobian_floor = default_jacobian_floor;
  bool filter = false;
  // [recipe]
  Recipe recipe;
  int compat_order = -1;  // < 0: no projection
  double taylor_c0 = 0.1;
  // [diagnostics]
  int energy_order = -1;
  int energy_every = 1;
  double jacobian_limit = 0.25;
  bool coevolve_b = false;
  bool halt_on_violation = false;
  // [output]
  std::string out_dir = "out";
  int snapshot_every = 0;
  // [verify]
  std::string suite = "all";
  unsigned seed = 7;
  double corrupt_a = 0.0;  // fault injection: added to A^{11} in the good-unknown suite
  int tangential_order = 4;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"grid", {"n1", "n2", "n3", "mode"}},
      {"time", {"dt", "t_end", "cfl", "jacobian_floor", "filter"}},
      {"recipe", {"name", "beta", "beta2", "psi_amp", "v_amp", "q_amp", "taylor", "q_offset", "kmax", "seed", "compat_order", "taylor_c0"}},
      {"eos", {"rho_bar", "q_limit"}},
      {"diagnostics", {"energy_order", "energy_every", "jacobian_limit", "coevolve_b", "halt_on_violation"}},
      {"output", {"dir", "snapshot_every"}},
      {"verify", {"suite", "seed", "corrupt_a", "tangential_order"}},
  };
  return keys;
}

template <class T>
T read_key(const boost::property_tree::ptree& pt, const std::string& path, T fallback) {
  const auto node = pt.get_child_optional(boost::property_tree::ptree::path_type(path, '.'));
  if (!node) return fallback;
  try {
    return node->get_value<T>();
  } catch (const boost::property_tree::ptree_bad_data&) {
    throw ConfigError("bad value for " + path + ": '" + node->data() + "'");
  }
}

inline bool read_flag(const boost::property_tree::ptree& pt, const std::string& path, bool fallback) {
  const std::string s = read_key<std::string>(pt, path, fallback ? "true" : "false");
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("bad value for " + path + ": '" + s + "'");
}

}  // namespace detail

/// Range checks; runs before any grid or field is allocated.
inline void validate(const RunConfig& c) {
  if (c.n1 < 4 || c.n2 < 4) throw ConfigError("grid.n1 and grid.n2 must be >= 4");
  if (c.n3 < 5) throw ConfigError("grid.n3 must be >= 5");
  if (!(c.dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (c.t_end < 0.0) throw ConfigError("time.t_end must be >= 0");
  if (!(c.cfl > 0.0)) throw ConfigError("time.cfl must be positive");
  if (!(c.jacobian_floor >= 0.0 && c.jacobian_floor < 1.0)) throw ConfigError("time.jacobian_floor must be in [0, 1)");
  if (!(c.recipe.eos.rho_bar > 0.0)) throw ConfigError("eos.rho_bar must be positive");
  if (c.recipe.kmax < 0) throw ConfigError("recipe.kmax must be >= 0");
  const std::set<std::string> recipes = {"static", "uniform", "smooth"};
  if (!recipes.contains(c.recipe.name)) throw ConfigError("unknown recipe '" + c.recipe.name + "'");
  if (c.compat_order > 3) throw ConfigError("recipe.compat_order must be <= 3");
  if (c.compat_order >= 0 && c.mode != Mode::slab) throw ConfigError("compatibility projection requires slab mode");
  if (c.energy_order > max_jet_order) throw ConfigError("diagnostics.energy_order must be <= 8");
  if (c.energy_every < 1) throw ConfigError("diagnostics.energy_every must be >= 1");
  if (c.snapshot_every < 0) throw ConfigError("output.snapshot_every must be >= 0");
  const std::set<std::string> suites = {"geometry", "goodunknown", "norms", "initdata", "all"};
  if (!suites.contains(c.suite)) throw ConfigError("unknown suite '" + c.suite + "'");
  if (c.tangential_order < 3 || c.tangential_order > 8) throw ConfigError("verify.tangential_order must be in [3, 8]");
}

/// Parses INI text; unknown sections or keys are rejected.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message());
  }
  const auto& keys = detail::config_keys();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key outside a section: " + section);
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.contains(key)) throw ConfigError("unknown key " + section + "." + key);
  }

  using detail::read_flag;
  using detail::read_key;
  RunConfig c;
  c.n1 = read_key(tree, "grid.n1", c.n1);
  c.n2 = read_key(tree, "grid.n2", c.n2);
  c.n3 = read_key(tree, "grid.n3", c.n3);
  const std::string mode = read_key<std::string>(tree, "grid.mode", "slab");
  if (mode == "slab") {
    c.mode = Mode::slab;
  } else if (mode == "torus") {
    c.mode = Mode::torus;
  } else {
    throw ConfigError("grid.mode must be slab or torus");
  }

  c.dt = read_key(tree, "time.dt", c.dt);
  c.t_end = read_key(tree, "time.t_end", c.t_end);
  c.cfl = read_key(tree, "time.cfl", c.cfl);
  c.jacobian_floor = read_key(tree, "time.jacobian_floor", c.jacobian_floor);
  c.filter = read_flag(tree, "time.filter", c.filter);

  Recipe& r = c.recipe;
  r.name = read_key(tree, "recipe.name", r.name);
  r.beta = read_key(tree, "recipe.beta", r.beta);
  r.beta2 = read_key(tree, "recipe.beta2", r.beta2);
  r.psi_amp = read_key(tree, "recipe.psi_amp", r.psi_amp);
  r.v_amp = read_key(tree, "recipe.v_amp", r.v_amp);
  r.q_amp = read_key(tree, "recipe.q_amp", r.q_amp);
  r.taylor = read_key(tree, "recipe.taylor", r.taylor);
  r.q_offset = read_key(tree, "recipe.q_offset", r.q_offset);
  r.kmax = read_key(tree, "recipe.kmax", r.kmax);
  r.seed = read_key(tree, "recipe.seed", r.seed);
  c.compat_order = read_key(tree, "recipe.compat_order", c.compat_order);
  c.taylor_c0 = read_key(tree, "recipe.taylor_c0", c.taylor_c0);
  r.eos.rho_bar = read_key(tree, "eos.rho_bar", r.eos.rho_bar);
  r.eos.q_limit = read_key(tree, "eos.q_limit", r.eos.q_limit);

  c.energy_order = read_key(tree, "diagnostics.energy_order", c.energy_order);
  c.energy_every = read_key(tree, "diagnostics.energy_every", c.energy_every);
  c.jacobian_limit = read_key(tree, "diagnostics.jacobian_limit", c.jacobian_limit);
  c.coevolve_b = read_flag(tree, "diagnostics.coevolve_b", c.coevolve_b);
  c.halt_on_violation = read_flag(tree, "diagnostics.halt_on_violation", c.halt_on_violation);

  c.out_dir = read_key(tree, "output.dir", c.out_dir);
  c.snapshot_every = read_key(tree, "output.snapshot_every", c.snapshot_every);

  c.suite = read_key(tree, "verify.suite", c.suite);
  c.seed = read_key(tree, "verify.seed", c.seed);
  c.corrupt_a = read_key(tree, "verify.corrupt_a", c.corrupt_a);
  c.tangential_order = read_key(tree, "verify.tangential_order", c.tangential_order);
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Full config as JSON, one object per section. Doubles print with round-trip precision.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["grid"] = {{"n1", c.n1}, {"n2", c.n2}, {"n3", c.n3}, {"mode", to_string(c.mode)}};
  j["time"] = {{"dt", c.dt}, {"t_end", c.t_end}, {"cfl", c.cfl}, {"jacobian_floor", c.jacobian_floor}, {"filter", c.filter}};
  const Recipe& r = c.recipe;
  j["recipe"] = {{"name", r.name},       {"beta", r.beta},     {"beta2", r.beta2},       {"psi_amp", r.psi_amp},
                 {"v_amp", r.v_amp},     {"q_amp", r.q_amp},   {"taylor", r.taylor},     {"q_offset", r.q_offset},
                 {"kmax", r.kmax},       {"seed", r.seed},     {"compat_order", c.compat_order}, {"taylor_c0", c.taylor_c0}};
  j["eos"] = {{"rho_bar", r.eos.rho_bar}, {"q_limit", r.eos.q_limit}};
  j["diagnostics"] = {{"energy_order", c.energy_order},
                      {"energy_every", c.energy_every},
                      {"jacobian_limit", c.jacobian_limit},
                      {"coevolve_b", c.coevolve_b},
                      {"halt_on_violation", c.halt_on_violation}};
  j["output"] = {{"dir", c.out_dir}, {"snapshot_every", c.snapshot_every}};
  j["verify"] = {{"suite", c.suite}, {"seed", c.seed}, {"corrupt_a", c.corrupt_a}, {"tangential_order", c.tangential_order}};
  return j;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

/// Hash of the canonical JSON echo, as 16 hex digits. Output directory excluded so the
/// same physics hashes the same wherever it is written.
inline std::string config_hash(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  j["output"].erase("dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

inline Grid make_grid(const RunConfig& c) { return build_grid(c.n1, c.n2, c.n3, c.mode); }

}  // namespace fbmhd
