#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbmhd/errors.hpp"
#include "fbmhd/grid.hpp"
#include "fbmhd/initdata.hpp"
#include "fbmhd/state.hpp"

namespace fbmhd {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

using NamedFields = std::vector<std::pair<std::string, Field>>;

/// Snapshot = `<base>.json` header (grid, time, EOS, field list, config hash) plus
/// `<base>.bin` holding every field as little-endian float64 in header order, y1 fastest.
inline void write_snapshot(const std::string& base, const NamedFields& fields, nlohmann::json header) {
  if (fields.empty()) throw IoError("empty snapshot");
  const Shape shape = fields.front().second.shape();
  header["format"] = "fbmhd-snapshot";
  header["version"] = 1;
  header["dtype"] = "float64-le";
  header["shape"] = {shape.n1, shape.n2, shape.n3};
  header["fields"] = nlohmann::json::array();
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot write " + base + ".bin");
  for (const auto& [name, f] : fields) {
    if (!(f.shape() == shape)) throw IoError("snapshot field " + name + " has a different shape");
    header["fields"].push_back(name);
    const auto vals = f.values();
    bin.write(reinterpret_cast<const char*>(vals.data()), static_cast<std::streamsize>(vals.size_bytes()));
  }
  bin.flush();
  if (!bin) throw IoError("write to " + base + ".bin failed");
  write_json(base + ".json", header);
}

struct Snapshot {
  nlohmann::json header;
  NamedFields fields;

  [[nodiscard]] const Field& at(const std::string& name) const {
    for (const auto& [n, f] : fields)
      if (n == name) return f;
    throw IoError("snapshot has no field " + name);
  }
};

inline Snapshot read_snapshot(const std::string& base) {
  Snapshot s;
  s.header = read_json(base + ".json");
  if (s.header.value("format", "") != "fbmhd-snapshot") throw IoError(base + ".json is not a snapshot header");
  const auto& sh = s.header.at("shape");
  const Shape shape{sh.at(0).get<int>(), sh.at(1).get<int>(), sh.at(2).get<int>()};
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot read " + base + ".bin");
  for (const auto& name : s.header.at("fields")) {
    Field f(shape);
    auto vals = f.values();
    bin.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size_bytes()));
    if (!bin) throw IoError(base + ".bin is truncated");
    s.fields.emplace_back(name.get<std::string>(), std::move(f));
  }
  if (bin.peek() != std::char_traits<char>::eof()) throw IoError(base + ".bin has trailing data");
  return s;
}

inline void write_state_snapshot(const std::string& base, const MaterialState& s, const Grid& g, const std::string& config_hash) {
  NamedFields f;
  for (int i = 0; i < 3; ++i) f.emplace_back("eta" + std::to_string(i + 1), s.eta[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 3; ++i) f.emplace_back("v" + std::to_string(i + 1), s.v[static_cast<std::size_t>(i)]);
  f.emplace_back("q", s.q);
  for (int i = 0; i < 3; ++i) f.emplace_back("b0_" + std::to_string(i + 1), s.b0[static_cast<std::size_t>(i)]);
  f.emplace_back("rho0", s.rho0);
  nlohmann::json h;
  h["kind"] = "state";
  h["mode"] = to_string(g.mode());
  h["t"] = s.t;
  h["eos"] = {{"rho_bar", s.eos.rho_bar}, {"q_limit", s.eos.q_limit}};
  h["config_hash"] = config_hash;
  write_snapshot(base, f, h);
}

inline MaterialState read_state_snapshot(const std::string& base) {
  const Snapshot snap = read_snapshot(base);
  if (snap.header.value("kind", "") != "state") throw IoError(base + " is not a state snapshot");
  MaterialState s;
  s.t = snap.header.at("t").get<double>();
  s.eos.rho_bar = snap.header.at("eos").at("rho_bar").get<double>();
  s.eos.q_limit = snap.header.at("eos").at("q_limit").get<double>();
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const std::string k = std::to_string(i + 1);
    s.eta[si] = snap.at("eta" + k);
    s.v[si] = snap.at("v" + k);
    s.b0[si] = snap.at("b0_" + k);
  }
  s.q = snap.at("q");
  s.rho0 = snap.at("rho0");
  return s;
}

/// Jet levels j = 0..order of eta - y, v, q and Q.
inline void write_jet_snapshot(const std::string& base, const Jet& jet, const Grid& g, const std::string& config_hash) {
  NamedFields f;
  for (int j = 0; j <= jet.order; ++j) {
    const std::string tag = "_" + std::to_string(j);
    for (int i = 0; i < 3; ++i) f.emplace_back("xi" + std::to_string(i + 1) + tag, jet.xi[static_cast<std::size_t>(i)].derivative(j));
    for (int i = 0; i < 3; ++i) f.emplace_back("v" + std::to_string(i + 1) + tag, jet.v[static_cast<std::size_t>(i)].derivative(j));
    f.emplace_back("q" + tag, jet.q.derivative(j));
    f.emplace_back("Q" + tag, jet.Q.derivative(j));
  }
  nlohmann::json h;
  h["kind"] = "jet";
  h["order"] = jet.order;
  h["mode"] = to_string(g.mode());
  h["config_hash"] = config_hash;
  write_snapshot(base, f, h);
}

/// A series CSV read back: the '#' comment line (if any), column names and numeric rows.
struct SeriesTable {
  std::string comment;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::vector<double> column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == name) {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
      }
    throw IoError("series has no column " + name);
  }
};

inline SeriesTable read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  SeriesTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comment = line.substr(line.find_first_not_of("# "));
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) throw IoError("ragged row in " + path);
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw IoError("bad number '" + c + "' in " + path);
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw IoError(path + " has no header");
  return t;
}

}  // namespace fbmhd
