#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dsotto/engine.hpp"
#include "dsotto/error.hpp"
#include "dsotto/model.hpp"
#include "dsotto/parallel.hpp"
#include "dsotto/thermostatics.hpp"

namespace dsotto::cli {

using json = nlohmann::ordered_json;

enum class Command {
  Spectrum,
  Quasistatic,
  PhaseDiagram,
  AsymmetricU,
  AtomsScan,
  FiniteTime,
  PowerScan,
  AsymmetricTime
};

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names = {
      {Command::Spectrum, "spectrum"},       {Command::Quasistatic, "quasistatic"},
      {Command::PhaseDiagram, "phase-diagram"}, {Command::AsymmetricU, "asymmetric-u"},
      {Command::AtomsScan, "atoms-scan"},   {Command::FiniteTime, "finite-time"},
      {Command::PowerScan, "power-scan"},   {Command::AsymmetricTime, "asymmetric-time"}};
  return names;
}

inline std::string to_string(Command c) {
  for (auto& [k, v] : command_names())
    if (k == c) return v;
  return "?";
}

inline Command parse_command(const std::string& s) {
  for (auto& [k, v] : command_names())
    if (v == s) return k;
  throw ConfigError("unknown command '" + s + "'");
}

inline bool is_finite_time(Command c) {
  return c == Command::FiniteTime || c == Command::PowerScan || c == Command::AsymmetricTime;
}

struct GridSpec {
  std::string axis;
  std::vector<double> values;
};

struct RunConfig {
  Command command = Command::Quasistatic;
  // model
  double omega = 1.0;  // spectrum command only
  double delta = 1.0;
  double lambda = 0.47;
  double u = 0.0;
  int n_atoms = 8;
  double omega_h = 2.0, omega_c = 1.0;
  bool delta_tracks_omega = true;
  // bath
  double alpha = 1e-3, omega_cut = 10.0, t_hot = 0.5, t_cold = 0.1;
  BasisConfig basis;
  // dynamics
  int n_kept = 40;
  double atomic_scale = 1.0;
  StrokeSchedule schedule;
  std::vector<GridSpec> grid;
  // output
  std::string output_path = "dsotto_out.csv";
  std::string format = "csv";
  int precision = 12;
  int n_levels = 20;  // spectrum command: rows written
  ModeConvention mode_convention = ModeConvention::Standard;
  FrictionRef friction_ref = FrictionRef::Gibbs;
  Transport transport = Transport::Sorted;
  int workers = 0;

  LegSpec leg() const { return {lambda, delta, omega_c, n_atoms, delta_tracks_omega}; }
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : (i + 1 == n ? b : a + i * (b - a) / (n - 1)));
  return v;
}

inline std::vector<std::string> required_axes(Command c) {
  switch (c) {
    case Command::PhaseDiagram: return {"lambda", "u"};
    case Command::AsymmetricU: return {"u2", "u4"};
    case Command::AtomsScan: return {"n_atoms", "lambda"};
    case Command::FiniteTime:
    case Command::PowerScan: return {"tau1", "tau2"};
    case Command::AsymmetricTime: return {"tau2", "tau4"};
    default: return {};
  }
}

inline const std::set<std::string>& quasistatic_axes() {
  static const std::set<std::string> s = {"lambda", "u", "u2", "u4", "t_hot", "t_cold", "n_atoms"};
  return s;
}

// Grids used when a config omits one.
inline std::vector<GridSpec> default_grid(Command c) {
  switch (c) {
    case Command::Quasistatic: return {{"lambda", linspace(0.1, 0.7, 301)}};
    case Command::PhaseDiagram: return {{"lambda", linspace(0.05, 0.9, 86)}, {"u", linspace(-1, 1, 21)}};
    case Command::AsymmetricU: return {{"u2", linspace(-1, 1, 21)}, {"u4", linspace(-1, 1, 21)}};
    case Command::AtomsScan: return {{"n_atoms", {2, 4, 8, 16}}, {"lambda", linspace(0.1, 0.7, 61)}};
    case Command::FiniteTime: return {{"tau1", {1000, 4000}}, {"tau2", {0.5, 5, 20, 200}}};
    case Command::PowerScan: return {{"tau1", {1000, 2000, 4000}}, {"tau2", {5, 10, 20, 40}}};
    case Command::AsymmetricTime: return {{"tau2", {0.5, 5, 20}}, {"tau4", {0.5, 5, 20}}};
    default: return {};
  }
}

// Reads obj[key] into out if present and removes it, so that anything left over is unknown.
template <class T>
void take(json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const std::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
  obj.erase(it);
}

inline void reject_leftovers(const json& obj, const std::string& where) {
  if (!obj.empty()) throw ConfigError("unknown key '" + where + "." + obj.begin().key() + "'");
}

inline json section(json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end()) return json::object();
  if (!it->is_object()) throw ConfigError(std::string(key) + ": expected an object");
  json s = *it;
  root.erase(it);
  return s;
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(c.omega > 0, "model.omega must be > 0");
  need(c.delta > 0, "model.delta must be > 0");
  need(c.n_atoms >= 1, "model.n_atoms must be >= 1");
  need(c.omega_h > c.omega_c && c.omega_c > 0, "model: need omega_h > omega_c > 0");
  if (c.command == Command::Spectrum)
    need(std::abs(c.u) < c.omega, "model.u: |u| < omega bound violated (u = " + std::to_string(c.u) +
                                      ", omega = " + std::to_string(c.omega) + ")");
  else
    need(std::abs(c.u) < c.omega_c, "model.u: |u| < omega bound violated (u = " + std::to_string(c.u) +
                                        ", omega_c = " + std::to_string(c.omega_c) + ")");
  need(c.alpha > 0, "bath.alpha must be > 0");
  need(c.omega_cut > 0, "bath.omega_cut must be > 0");
  need(c.t_hot > 0 && c.t_cold > 0, "bath: temperatures must be > 0");
  if (c.command != Command::Spectrum && !is_finite_time(c.command))
    need(c.t_hot > c.t_cold, "bath: need t_hot > t_cold");
  c.basis.validate();
  need(c.n_kept >= 1, "dynamics.n_kept must be >= 1");
  need(c.atomic_scale >= 0, "dynamics.atomic_scale must be >= 0");
  c.schedule.validate();
  need(c.format == "csv" || c.format == "json", "output.format must be csv or json");
  need(c.precision >= 1 && c.precision <= 17, "output.precision must be in 1..17");
  need(c.n_levels >= 1, "output.n_levels must be >= 1");
  need(!c.output_path.empty(), "output.path must not be empty");

  const auto req = detail::required_axes(c.command);
  if (c.command == Command::Spectrum) {
    need(c.grid.empty(), "spectrum takes no grid axes");
  } else if (c.command == Command::Quasistatic) {
    need(c.grid.size() == 1 || c.grid.size() == 2, "quasistatic takes 1 or 2 grid axes");
    for (auto& g : c.grid)
      need(detail::quasistatic_axes().count(g.axis), "grid axis '" + g.axis + "' is not valid for quasistatic");
  } else {
    std::vector<std::string> got;
    for (auto& g : c.grid) got.push_back(g.axis);
    need(got == req, to_string(c.command) + " requires grid axes " + req[0] + " x " + req[1]);
  }
  for (auto& g : c.grid) {
    need(!g.values.empty(), "grid axis '" + g.axis + "' is empty");
    for (double v : g.values) need(std::isfinite(v), "grid axis '" + g.axis + "' has a non-finite value");
    if (g.axis.rfind("tau", 0) == 0)
      for (double v : g.values) need(v >= 0, "grid axis '" + g.axis + "' must be >= 0");
    if (g.axis == "n_atoms")
      for (double v : g.values) need(v >= 1 && v == std::floor(v), "grid axis n_atoms must hold positive integers");
  }
}

// Builds a validated config from a JSON document. Every key is consumed; leftovers are errors.
inline RunConfig from_json(json root) {
  using namespace detail;
  if (!root.is_object()) throw ConfigError("config root must be an object");
  RunConfig c;
  std::string cmd;
  take(root, "command", cmd, "");
  if (cmd.empty()) throw ConfigError("command is required");
  c.command = parse_command(cmd);
  c.n_atoms = is_finite_time(c.command) || c.command == Command::Spectrum ? 2 : 8;
  if (c.command == Command::AsymmetricU) c.lambda = 0.48;

  json m = section(root, "model");
  take(m, "omega", c.omega, "model");
  take(m, "delta", c.delta, "model");
  take(m, "lambda", c.lambda, "model");
  take(m, "u", c.u, "model");
  take(m, "n_atoms", c.n_atoms, "model");
  take(m, "omega_h", c.omega_h, "model");
  take(m, "omega_c", c.omega_c, "model");
  take(m, "delta_tracks_omega", c.delta_tracks_omega, "model");
  reject_leftovers(m, "model");

  json b = section(root, "bath");
  take(b, "alpha", c.alpha, "bath");
  take(b, "omega_cut", c.omega_cut, "bath");
  take(b, "t_hot", c.t_hot, "bath");
  take(b, "t_cold", c.t_cold, "bath");
  reject_leftovers(b, "bath");

  json bs = section(root, "basis");
  take(bs, "n_tr", c.basis.n_tr, "basis");
  take(bs, "fock_cutoff", c.basis.fock_cutoff, "basis");
  take(bs, "convergence_rel_tol", c.basis.convergence_rel_tol, "basis");
  take(bs, "n_levels_checked", c.basis.n_levels_checked, "basis");
  reject_leftovers(bs, "basis");

  json d = section(root, "dynamics");
  take(d, "n_kept", c.n_kept, "dynamics");
  take(d, "atomic_scale", c.atomic_scale, "dynamics");
  reject_leftovers(d, "dynamics");

  json s = section(root, "schedule");
  bool sym13 = !s.contains("tau3"), sym24 = !s.contains("tau4");
  take(s, "tau1", c.schedule.tau1, "schedule");
  take(s, "tau2", c.schedule.tau2, "schedule");
  take(s, "tau3", c.schedule.tau3, "schedule");
  take(s, "tau4", c.schedule.tau4, "schedule");
  take(s, "dt_isochoric", c.schedule.dt_isochoric, "schedule");
  take(s, "dt_adiabatic", c.schedule.dt_adiabatic, "schedule");
  take(s, "n_cycles", c.schedule.n_cycles, "schedule");
  reject_leftovers(s, "schedule");
  if (sym13) c.schedule.tau3 = c.schedule.tau1;
  if (sym24) c.schedule.tau4 = c.schedule.tau2;

  if (auto it = root.find("grid"); it != root.end()) {
    if (!it->is_array()) throw ConfigError("grid: expected an array of axes");
    for (json ax : *it) {
      if (!ax.is_object()) throw ConfigError("grid: each axis must be an object");
      GridSpec g;
      take(ax, "axis", g.axis, "grid");
      if (g.axis.empty()) throw ConfigError("grid: axis name is required");
      std::vector<double> values;
      take(ax, "values", values, "grid");
      if (!values.empty()) {
        g.values = values;
      } else {
        double start = NAN, stop = NAN;
        int count = 0;
        take(ax, "start", start, "grid");
        take(ax, "stop", stop, "grid");
        take(ax, "count", count, "grid");
        if (!std::isfinite(start) || !std::isfinite(stop) || count < 1)
          throw ConfigError("grid axis '" + g.axis + "' needs start, stop and count >= 1, or values");
        g.values = linspace(start, stop, count);
      }
      reject_leftovers(ax, "grid");
      c.grid.push_back(g);
    }
    root.erase(it);
  } else {
    c.grid = default_grid(c.command);
  }

  json o = section(root, "output");
  take(o, "path", c.output_path, "output");
  take(o, "format", c.format, "output");
  take(o, "precision", c.precision, "output");
  take(o, "n_levels", c.n_levels, "output");
  reject_leftovers(o, "output");

  std::string mc = "standard", fr = "gibbs", tr = "sorted";
  take(root, "mode_convention", mc, "");
  take(root, "friction_ref", fr, "");
  take(root, "transport", tr, "");
  take(root, "workers", c.workers, "");
  reject_leftovers(root, "");

  if (mc == "standard") c.mode_convention = ModeConvention::Standard;
  else if (mc == "paper") c.mode_convention = ModeConvention::Paper;
  else throw ConfigError("mode_convention must be standard or paper");
  if (fr == "gibbs") c.friction_ref = FrictionRef::Gibbs;
  else if (fr == "adiabatic") c.friction_ref = FrictionRef::Adiabatic;
  else throw ConfigError("friction_ref must be gibbs or adiabatic");
  if (tr == "sorted") c.transport = Transport::Sorted;
  else if (tr == "parity") c.transport = Transport::Parity;
  else throw ConfigError("transport must be sorted or parity");
  if (c.workers <= 0) c.workers = default_workers();

  validate(c);
  return c;
}

// Full, materialized configuration, echoed into every output header.
inline json to_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["model"] = {{"omega", c.omega}, {"delta", c.delta}, {"lambda", c.lambda}, {"u", c.u},
                {"n_atoms", c.n_atoms}, {"omega_h", c.omega_h}, {"omega_c", c.omega_c},
                {"delta_tracks_omega", c.delta_tracks_omega}};
  j["bath"] = {{"alpha", c.alpha}, {"omega_cut", c.omega_cut}, {"t_hot", c.t_hot}, {"t_cold", c.t_cold}};
  j["basis"] = {{"n_tr", c.basis.n_tr}, {"fock_cutoff", c.basis.fock_cutoff},
                {"convergence_rel_tol", c.basis.convergence_rel_tol},
                {"n_levels_checked", c.basis.n_levels_checked}};
  j["dynamics"] = {{"n_kept", c.n_kept}, {"atomic_scale", c.atomic_scale}};
  j["schedule"] = {{"tau1", c.schedule.tau1}, {"tau2", c.schedule.tau2}, {"tau3", c.schedule.tau3},
                   {"tau4", c.schedule.tau4}, {"dt_isochoric", c.schedule.dt_isochoric},
                   {"dt_adiabatic", c.schedule.dt_adiabatic}, {"n_cycles", c.schedule.n_cycles}};
  j["grid"] = json::array();
  for (auto& g : c.grid) j["grid"].push_back({{"axis", g.axis}, {"values", g.values}});
  j["output"] = {{"path", c.output_path}, {"format", c.format}, {"precision", c.precision},
                 {"n_levels", c.n_levels}};
  j["mode_convention"] = c.mode_convention == ModeConvention::Paper ? "paper" : "standard";
  j["friction_ref"] = c.friction_ref == FrictionRef::Adiabatic ? "adiabatic" : "gibbs";
  j["transport"] = c.transport == Transport::Parity ? "parity" : "sorted";
  j["workers"] = c.workers;
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

// Sets root[a][b] (or root[a] when b is empty), creating the section if needed.
inline void override_key(json& root, const std::string& a, const std::string& b, const json& v) {
  if (b.empty()) {
    root[a] = v;
    return;
  }
  if (!root.contains(a)) root[a] = json::object();
  root[a][b] = v;
}

// "axis:start:stop:count" or "axis=v1,v2,..."
inline json parse_grid_flag(const std::string& s) {
  auto eq = s.find('=');
  if (eq != std::string::npos) {
    json ax{{"axis", s.substr(0, eq)}, {"values", json::array()}};
    std::string rest = s.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        ax["values"].push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("bad grid value '" + tok + "' in '" + s + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return ax;
  }
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(':', pos);
    parts.push_back(s.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  if (parts.size() != 4) throw ConfigError("grid flag must be axis:start:stop:count or axis=v1,v2 (got '" + s + "')");
  try {
    return {{"axis", parts[0]}, {"start", std::stod(parts[1])}, {"stop", std::stod(parts[2])},
            {"count", std::stoi(parts[3])}};
  } catch (const std::exception&) {
    throw ConfigError("bad number in grid flag '" + s + "'");
  }
}

// 64-bit FNV-1a of the canonical config dump.
inline std::string config_hash(const RunConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dsotto::cli
