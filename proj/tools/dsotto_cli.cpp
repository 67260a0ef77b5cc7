// Command-line front end. Exit codes: 0 success, 1 configuration error, 2 some points failed.
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dsotto/cli/config.hpp"
#include "dsotto/cli/execute.hpp"

namespace {

using dsotto::cli::json;

struct Flag {
  const char* name;
  const char* section;  // empty for top-level keys
  const char* key;
  enum Kind { Real, Int, Text, Bool } kind;
  const char* help;
};

const std::vector<Flag> kFlags = {
    {"--omega", "model", "omega", Flag::Real, "cavity frequency (spectrum command)"},
    {"--delta", "model", "delta", Flag::Real, "atomic splitting at omega = omega_c"},
    {"--lambda", "model", "lambda", Flag::Real, "atom-field coupling"},
    {"--u", "model", "u", Flag::Real, "Stark strength"},
    {"--n-atoms", "model", "n_atoms", Flag::Int, "number of atoms"},
    {"--omega-h", "model", "omega_h", Flag::Real, "hot-leg frequency"},
    {"--omega-c", "model", "omega_c", Flag::Real, "cold-leg frequency"},
    {"--delta-tracks-omega", "model", "delta_tracks_omega", Flag::Bool, "scale delta with omega"},
    {"--alpha", "bath", "alpha", Flag::Real, "bath coupling"},
    {"--omega-cut", "bath", "omega_cut", Flag::Real, "bath cutoff"},
    {"--t-hot", "bath", "t_hot", Flag::Real, "hot bath temperature"},
    {"--t-cold", "bath", "t_cold", Flag::Real, "cold bath temperature"},
    {"--n-tr", "basis", "n_tr", Flag::Int, "displaced-oscillator levels per sector"},
    {"--fock-cutoff", "basis", "fock_cutoff", Flag::Int, "bare photon cutoff"},
    {"--n-kept", "dynamics", "n_kept", Flag::Int, "dressed levels kept in the dynamics"},
    {"--atomic-scale", "dynamics", "atomic_scale", Flag::Real, "atomic jump operator scale"},
    {"--tau1", "schedule", "tau1", Flag::Real, "hot isochore duration"},
    {"--tau2", "schedule", "tau2", Flag::Real, "expansion duration"},
    {"--tau3", "schedule", "tau3", Flag::Real, "cold isochore duration"},
    {"--tau4", "schedule", "tau4", Flag::Real, "compression duration"},
    {"--dt-isochoric", "schedule", "dt_isochoric", Flag::Real, "isochoric step"},
    {"--dt-adiabatic", "schedule", "dt_adiabatic", Flag::Real, "adiabatic step"},
    {"--n-cycles", "schedule", "n_cycles", Flag::Int, "cycles per engine run"},
    {"--output", "output", "path", Flag::Text, "output file"},
    {"--format", "output", "format", Flag::Text, "csv or json"},
    {"--precision", "output", "precision", Flag::Int, "significant digits"},
    {"--n-levels", "output", "n_levels", Flag::Int, "levels written by the spectrum command"},
    {"--mode-convention", "", "mode_convention", Flag::Text, "standard or paper"},
    {"--friction-ref", "", "friction_ref", Flag::Text, "gibbs or adiabatic"},
    {"--transport", "", "transport", Flag::Text, "sorted or parity"},
    {"--workers", "", "workers", Flag::Int, "worker threads (0 = all cores)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dicke-Stark quantum Otto engine simulator"};
  std::string command, config_path;
  std::vector<std::string> grid_flags;
  std::map<std::string, std::string> raw;
  app.add_option("command", command,
                 "spectrum | quasistatic | phase-diagram | asymmetric-u | atoms-scan | "
                 "finite-time | power-scan | asymmetric-time");
  app.add_option("-c,--config", config_path, "JSON configuration file");
  app.add_option("--grid", grid_flags, "axis:start:stop:count or axis=v1,v2,... (replaces the file grid)");
  for (const auto& f : kFlags) app.add_option(f.name, raw[f.name], f.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    json root = config_path.empty() ? json::object() : dsotto::cli::read_json_file(config_path);
    if (!command.empty()) root["command"] = command;
    for (const auto& f : kFlags) {
      if (app.count(f.name) == 0) continue;
      const std::string& v = raw[f.name];
      json value;
      try {
        switch (f.kind) {
          case Flag::Real: value = std::stod(v); break;
          case Flag::Int: value = std::stoi(v); break;
          case Flag::Bool:
            if (v != "true" && v != "false") throw std::invalid_argument(v);
            value = v == "true";
            break;
          default: value = v;
        }
      } catch (const std::exception&) {
        throw dsotto::ConfigError(std::string(f.name) + ": cannot parse '" + v + "'");
      }
      dsotto::cli::override_key(root, f.section, f.key, value);
    }
    if (!grid_flags.empty()) {
      root["grid"] = json::array();
      for (const auto& g : grid_flags) root["grid"].push_back(dsotto::cli::parse_grid_flag(g));
    }
    const auto cfg = dsotto::cli::from_json(root);
    return dsotto::cli::execute(cfg, std::cerr);
  } catch (const dsotto::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const dsotto::DomainError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
