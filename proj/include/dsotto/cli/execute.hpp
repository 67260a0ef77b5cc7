#pragma once

#include <chrono>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "dsotto/cli/config.hpp"
#include "dsotto/cli/table.hpp"
#include "dsotto/engine.hpp"
#include "dsotto/sweep.hpp"

namespace dsotto::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
  Table table;
  int failed_points = 0;
  json certificates = json::array();
  int exit_code() const { return failed_points ? 2 : 0; }
};

namespace detail {

inline Cell opt(const std::optional<double>& x) {
  return x ? Cell(*x) : Cell(std::monostate{});
}

inline json certificate(const Spectrum& s) {
  const ModelParams& p = s.params;
  return {{"omega", p.omega()},    {"delta", p.delta()},       {"lambda", p.lambda()},
          {"u", p.u()},            {"n_atoms", p.n_atoms()},   {"certified", s.certified},
          {"converged", s.converged},
          {"convergence_shift", std::isfinite(s.convergence_shift) ? json(s.convergence_shift) : json(nullptr)}};
}

inline SweepVar sweep_var(const std::string& name) {
  for (SweepVar v : {SweepVar::Lambda, SweepVar::U, SweepVar::U2, SweepVar::U4, SweepVar::THot,
                     SweepVar::TCold, SweepVar::NAtoms})
    if (to_string(v) == name) return v;
  throw ConfigError("grid axis '" + name + "' is not a quasistatic variable");
}

inline RunResult run_spectrum(const RunConfig& c) {
  RunResult r;
  r.table.columns = {"level", "energy", "parity"};
  const LegSpec leg = c.leg();
  const ModelParams p(c.omega, leg.delta_at(c.omega), c.lambda, c.u, c.n_atoms);
  const Spectrum s = diagonalize(p, c.basis, {.eigenvectors = false, .certify = true});
  const int n = std::min(c.n_levels, s.dim());
  for (int i = 0; i < n; ++i)
    r.table.rows.push_back({Cell((long long)i), Cell(s.energies[i]), Cell((long long)s.parity[i])});
  r.certificates.push_back(certificate(s));
  if (!s.converged) r.failed_points = 1;
  return r;
}

inline RunResult run_quasistatic(const RunConfig& c) {
  RunResult r;
  QuasistaticCycleSpec tmpl;
  tmpl.leg = c.leg();
  tmpl.omega_h = c.omega_h;
  tmpl.omega_c = c.omega_c;
  tmpl.u_expansion = tmpl.u_compression = c.u;
  tmpl.t_hot = c.t_hot;
  tmpl.t_cold = c.t_cold;
  tmpl.basis = c.basis;
  tmpl.transport = c.transport;
  tmpl.convention = c.mode_convention;

  std::vector<GridAxis> axes;
  for (const auto& g : c.grid) axes.push_back({sweep_var(g.axis), g.values});
  SpectrumCache cache;
  const auto rows = sweep(axes, tmpl, cache, c.workers);

  for (const auto& g : c.grid) r.table.columns.push_back(g.axis);
  for (const char* col : {"q_hot", "q_cold", "work", "efficiency", "mode", "lambda_c_cold",
                          "hot_converged", "cold_converged", "error"})
    r.table.columns.push_back(col);
  for (const auto& row : rows) {
    std::vector<Cell> cells;
    for (double x : row.coords) cells.emplace_back(x);
    if (row.report) {
      const auto& q = *row.report;
      cells.insert(cells.end(), {Cell(q.q_hot), Cell(q.q_cold), Cell(q.work), opt(q.efficiency),
                                 Cell(to_string(q.mode)), opt(q.lambda_c_cold),
                                 Cell((long long)q.hot_converged), Cell((long long)q.cold_converged),
                                 Cell(std::string())});
    } else {
      ++r.failed_points;
      for (int i = 0; i < 8; ++i) cells.emplace_back(std::monostate{});
      cells.emplace_back(row.error);
    }
    r.table.rows.push_back(std::move(cells));
  }
  for (const auto& s : cache.snapshot()) r.certificates.push_back(certificate(*s));
  return r;
}

inline const std::vector<std::string>& finite_time_columns() {
  static const std::vector<std::string> cols = {
      "cycle",        "q_hot",           "q_cold",           "work",     "efficiency",
      "eta_via_entropy", "power",        "entropy_total",    "friction_expand",
      "friction_compress", "fidelity",   "steady",           "mode",     "first_law_residual",
      "error"};
  return cols;
}

inline void set_tau(StrokeSchedule& s, const std::string& axis, double x) {
  if (axis == "tau1") s.tau1 = x;
  else if (axis == "tau2") s.tau2 = x;
  else if (axis == "tau3") s.tau3 = x;
  else if (axis == "tau4") s.tau4 = x;
  else throw ConfigError("grid axis '" + axis + "' is not a stroke duration");
}

inline RunResult run_finite_time(const RunConfig& c) {
  RunResult r;
  for (const auto& g : c.grid) r.table.columns.push_back(g.axis);
  for (const auto& col : finite_time_columns()) r.table.columns.push_back(col);

  std::vector<GridAxis> axes;
  for (const auto& g : c.grid) axes.push_back({SweepVar::Lambda, g.values});
  const auto pts = grid_points(axes);
  const int n_result_cols = int(finite_time_columns().size());

  auto failed_row = [&](const std::vector<double>& pt, const std::string& err) {
    std::vector<Cell> cells;
    for (double x : pt) cells.emplace_back(x);
    for (int i = 0; i + 1 < n_result_cols; ++i) cells.emplace_back(std::monostate{});
    cells.emplace_back(err);
    return cells;
  };

  CycleParams cp{c.leg(), c.omega_h, c.omega_c, c.u};
  EngineBaths baths{c.alpha, c.omega_cut, c.t_hot, c.t_cold};
  EngineOptions eo;
  eo.basis = c.basis;
  eo.n_kept = c.n_kept;
  eo.atomic_scale = c.atomic_scale;
  eo.friction_ref = c.friction_ref;
  eo.convention = c.mode_convention;

  std::unique_ptr<OttoEngine> engine;
  try {
    engine = std::make_unique<OttoEngine>(cp, baths, eo);
  } catch (const std::exception& e) {
    for (const auto& pt : pts) r.table.rows.push_back(failed_row(pt, e.what()));
    r.failed_points = int(pts.size());
    return r;
  }
  r.certificates.push_back(certificate(engine->hot_spectrum()));
  r.certificates.push_back(certificate(engine->cold_spectrum()));

  std::vector<std::vector<std::vector<Cell>>> blocks(pts.size());
  std::vector<int> failed(pts.size(), 0);
  parallel_for(pts.size(), c.workers, [&](std::size_t i) {
    try {
      StrokeSchedule s = c.schedule;
      for (std::size_t a = 0; a < c.grid.size(); ++a) set_tau(s, c.grid[a].axis, pts[i][a]);
      if (c.command == Command::FiniteTime || c.command == Command::PowerScan) {
        s.tau3 = s.tau1;
        s.tau4 = s.tau2;
      }
      const auto reports = engine->run_engine(s);
      for (const auto& rep : reports) {
        std::vector<Cell> cells;
        for (double x : pts[i]) cells.emplace_back(x);
        cells.insert(cells.end(),
                     {Cell((long long)rep.cycle), Cell(rep.q_hot), Cell(rep.q_cold), Cell(rep.work),
                      opt(rep.efficiency), opt(rep.eta_via_entropy), opt(rep.power),
                      Cell(rep.entropy_total), Cell(rep.friction_expand), Cell(rep.friction_compress),
                      opt(rep.fidelity), Cell((long long)rep.steady), Cell(to_string(rep.mode)),
                      Cell(rep.first_law_residual), Cell(std::string())});
        blocks[i].push_back(std::move(cells));
      }
    } catch (const std::exception& e) {
      blocks[i] = {failed_row(pts[i], e.what())};
      failed[i] = 1;
    }
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r.failed_points += failed[i];
    for (auto& row : blocks[i]) r.table.rows.push_back(std::move(row));
  }
  return r;
}

}  // namespace detail

// Computes the table for a validated configuration. Per-point failures land in the error column.
inline RunResult run(const RunConfig& c) {
  if (c.command == Command::Spectrum) return detail::run_spectrum(c);
  if (is_finite_time(c.command)) return detail::run_finite_time(c);
  return detail::run_quasistatic(c);
}

inline std::vector<std::string> header_lines(const RunConfig& c) {
  return {std::string("dsotto ") + kVersion + " " + to_string(c.command),
          "config_hash: " + config_hash(c), "config: " + to_json(c).dump()};
}

// Runs, writes the table and a <path>.meta.json sidecar. Returns the process exit code.
inline int execute(const RunConfig& c, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = run(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream out(c.output_path);
  if (!out) throw std::runtime_error("cannot open output '" + c.output_path + "'");
  if (c.format == "csv") {
    write_csv(out, header_lines(c), r.table, c.precision);
  } else {
    json doc;
    doc["version"] = kVersion;
    doc["command"] = to_string(c.command);
    doc["config_hash"] = config_hash(c);
    doc["config"] = to_json(c);
    doc["columns"] = r.table.columns;
    doc["rows"] = table_to_json(r.table, c.precision);
    out << doc.dump(2) << '\n';
  }

  json meta;
  meta["version"] = kVersion;
  meta["command"] = to_string(c.command);
  meta["config_hash"] = config_hash(c);
  meta["config"] = to_json(c);
  meta["rows"] = r.table.rows.size();
  meta["failed_points"] = r.failed_points;
  meta["wall_time_s"] = wall;
  meta["certificates"] = r.certificates;
  std::ofstream side(c.output_path + ".meta.json");
  side << meta.dump(2) << '\n';

  log << to_string(c.command) << ": " << r.table.rows.size() << " rows, " << r.failed_points
      << " failed points, " << format_number(wall, 4) << " s -> " << c.output_path << '\n';
  return r.exit_code();
}

}  // namespace dsotto::cli
