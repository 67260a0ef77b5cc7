#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsotto/error.hpp"
#include "dsotto/model.hpp"
#include "dsotto/spectrum.hpp"

namespace dsotto {

struct GibbsState {
  double temperature = 0.0;
  Eigen::VectorXd populations;
  double partition_log = 0.0;  // ln Z with Z = sum exp(-E_n / T)
  double ground_energy = 0.0;
};

// Canonical populations, shifted by the ground energy before exponentiating.
inline GibbsState gibbs(const Eigen::VectorXd& energies, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("gibbs: temperature must be > 0");
  if (energies.size() == 0) throw DomainError("gibbs: empty spectrum");
  GibbsState g;
  g.temperature = T;
  g.ground_energy = energies.minCoeff();
  g.populations = (-(energies.array() - g.ground_energy) / T).exp();
  const double z = g.populations.sum();
  g.populations /= z;
  g.partition_log = std::log(z) - g.ground_energy / T;
  return g;
}

inline GibbsState gibbs(const Spectrum& s, double T) { return gibbs(s.energies, T); }

// Finite-temperature superradiant threshold
//   lambda_c = sqrt( (delta/4) [ omega / tanh(delta / 2T) - u/2 ] ).
inline double critical_coupling(double delta, double omega, double u, double T) {
  if (!(T > 0.0)) throw DomainError("critical_coupling: T must be > 0");
  const double radicand = 0.25 * delta * (omega / std::tanh(delta / (2.0 * T)) - 0.5 * u);
  if (std::abs(radicand) <= 1e-15) return 0.0;
  if (radicand < 0.0)
    throw DomainError("critical_coupling: negative radicand " + std::to_string(radicand) +
                      " (Stark strength too large for a transition at this temperature)");
  return std::sqrt(radicand);
}

enum class Mode { Engine, Refrigerator, Heater, Accelerator, Idle };
enum class ModeConvention { Standard, Paper };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Engine: return "engine";
    case Mode::Refrigerator: return "refrigerator";
    case Mode::Heater: return "heater";
    case Mode::Accelerator: return "accelerator";
    default: return "idle";
  }
}

// Sign table of the four Otto modes. Values within 1e-12 * scale of zero count as zero.
// ModeConvention::Paper files the refrigerator under W > 0, which contradicts W = Qh + Qc.
inline Mode classify_mode(double q_hot, double q_cold, double work,
                          ModeConvention conv = ModeConvention::Standard) {
  const double eps = 1e-12 * std::max({1.0, std::abs(q_hot), std::abs(q_cold), std::abs(work)});
  auto sgn = [eps](double x) { return x > eps ? 1 : (x < -eps ? -1 : 0); };
  const int h = sgn(q_hot), c = sgn(q_cold), w = sgn(work);
  if (h > 0 && c < 0 && w > 0) return Mode::Engine;
  if (c > 0 && h < 0 && w == (conv == ModeConvention::Paper ? 1 : -1)) return Mode::Refrigerator;
  if (c < 0 && h < 0 && w < 0) return Mode::Heater;
  if (c < 0 && h > 0 && w < 0) return Mode::Accelerator;
  return Mode::Idle;
}

// How populations are carried across the adiabatic legs.
//   Sorted: level n of the hot spectrum maps onto level n of the cold spectrum.
//   Parity: the same pairing inside each parity sector, which is what a slow unitary ramp
//           does, since the ramp preserves parity and levels of opposite parity may cross.
enum class Transport { Sorted, Parity };

struct QuasistaticCycleSpec {
  LegSpec leg;  // lambda, delta, N and the delta/omega convention
  double omega_h = 2.0, omega_c = 1.0;
  double u_expansion = 0.0;    // U_2, attached to the hot leg
  double u_compression = 0.0;  // U_4, attached to the cold leg
  double t_hot = 0.5, t_cold = 0.1;
  BasisConfig basis;
  Transport transport = Transport::Sorted;
  ModeConvention convention = ModeConvention::Standard;

  void validate() const {
    if (!(omega_h > omega_c && omega_c > 0.0))
      throw ConfigError("quasistatic cycle requires omega_h > omega_c > 0");
    if (!(t_hot > t_cold && t_cold > 0.0))
      throw ConfigError("quasistatic cycle requires t_hot > t_cold > 0");
    basis.validate();
  }
  ModelParams hot() const { return leg.at(omega_h, u_expansion); }
  ModelParams cold() const { return leg.at(omega_c, u_compression); }
};

struct QuasistaticReport {
  double q_hot = 0.0, q_cold = 0.0, work = 0.0;
  std::optional<double> efficiency;
  Mode mode = Mode::Idle;
  std::optional<double> lambda_c_cold;
  bool hot_converged = false, cold_converged = false;
};

namespace detail {

// Index maps putting the k-th level of each parity sector of `b` under the k-th level of
// the same sector of `a`. Returns pairs (index in a, index in b).
inline std::vector<std::pair<int, int>> parity_pairing(const std::vector<int>& pa,
                                                       const std::vector<int>& pb) {
  std::vector<std::pair<int, int>> out;
  for (int sector : {1, -1}) {
    std::vector<int> ia, ib;
    for (int i = 0; i < int(pa.size()); ++i)
      if (pa[i] == sector) ia.push_back(i);
    for (int i = 0; i < int(pb.size()); ++i)
      if (pb[i] == sector) ib.push_back(i);
    if (ia.size() != ib.size()) throw ConfigError("parity sectors differ in size between legs");
    for (std::size_t k = 0; k < ia.size(); ++k) out.emplace_back(ia[k], ib[k]);
  }
  return out;
}

}  // namespace detail

// Quasistatic Otto cycle from two spectra. Populations thermalize fully on each leg and are
// carried unchanged in index across the adiabatic strokes:
//   Qh = sum E^h_n (P^h_n - P^c_n),  Qc = sum E^c_n (P^c_n - P^h_n),  W = Qh + Qc.
inline QuasistaticReport quasistatic_cycle(const Spectrum& hot, const Spectrum& cold,
                                           const QuasistaticCycleSpec& spec) {
  if (hot.dim() != cold.dim())
    throw ConfigError("quasistatic_cycle: hot and cold spectra differ in dimension");
  const GibbsState gh = gibbs(hot, spec.t_hot);
  const GibbsState gc = gibbs(cold, spec.t_cold);
  QuasistaticReport r;
  if (spec.transport == Transport::Sorted) {
    const Eigen::ArrayXd dp = gh.populations.array() - gc.populations.array();
    r.q_hot = (hot.energies.array() * dp).sum();
    r.q_cold = -(cold.energies.array() * dp).sum();
  } else {
    for (auto [a, b] : detail::parity_pairing(hot.parity, cold.parity)) {
      const double dp = gh.populations[a] - gc.populations[b];
      r.q_hot += hot.energies[a] * dp;
      r.q_cold -= cold.energies[b] * dp;
    }
  }
  r.work = r.q_hot + r.q_cold;
  r.mode = classify_mode(r.q_hot, r.q_cold, r.work, spec.convention);
  const double eps = 1e-12 * std::max(1.0, std::abs(r.q_hot));
  if (r.q_hot > eps) r.efficiency = r.work / r.q_hot;
  try {
    const ModelParams c = spec.cold();
    r.lambda_c_cold = critical_coupling(c.delta(), c.omega(), c.u(), spec.t_cold);
  } catch (const DomainError&) {
  }
  r.hot_converged = hot.converged;
  r.cold_converged = cold.converged;
  return r;
}

inline QuasistaticReport quasistatic_cycle(const QuasistaticCycleSpec& spec) {
  spec.validate();
  const DiagonalizeOptions opt{.eigenvectors = false};
  const Spectrum hot = diagonalize(spec.hot(), spec.basis, opt);
  const Spectrum cold = diagonalize(spec.cold(), spec.basis, opt);
  return quasistatic_cycle(hot, cold, spec);
}

}  // namespace dsotto
