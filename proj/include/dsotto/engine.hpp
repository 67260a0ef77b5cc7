#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsotto/adiabatic.hpp"
#include "dsotto/dynamics.hpp"
#include "dsotto/functionals.hpp"
#include "dsotto/spectrum.hpp"
#include "dsotto/thermostatics.hpp"

namespace dsotto {

struct StrokeSchedule {
  double tau1 = 1000.0, tau2 = 20.0, tau3 = 1000.0, tau4 = 20.0;
  double dt_isochoric = 0.1;
  double dt_adiabatic = 0.05;
  int n_cycles = 5;

  static StrokeSchedule symmetric(double iso, double adi, int cycles = 5) {
    StrokeSchedule s;
    s.tau1 = s.tau3 = iso;
    s.tau2 = s.tau4 = adi;
    s.n_cycles = cycles;
    return s;
  }
  double period() const { return tau1 + tau2 + tau3 + tau4; }
  void validate() const {
    for (double t : {tau1, tau2, tau3, tau4})
      if (!(t >= 0.0)) throw ConfigError("schedule: stroke durations must be >= 0");
    if (!(dt_isochoric > 0.0) || !(dt_adiabatic > 0.0)) throw ConfigError("schedule: dt must be > 0");
    if (n_cycles < 1) throw ConfigError("schedule: n_cycles must be >= 1");
  }
};

enum class FrictionRef { Gibbs, Adiabatic };
enum class StrokeKind { IsochoricHot, AdiabaticExpand, IsochoricCold, AdiabaticCompress };

inline std::string to_string(StrokeKind k) {
  switch (k) {
    case StrokeKind::IsochoricHot: return "isochoric-hot";
    case StrokeKind::AdiabaticExpand: return "adiabatic-expand";
    case StrokeKind::IsochoricCold: return "isochoric-cold";
    default: return "adiabatic-compress";
  }
}

struct CycleParams {
  LegSpec leg;
  double omega_h = 2.0, omega_c = 1.0;
  double u = 0.0;
  ModelParams hot() const { return leg.at(omega_h, u); }
  ModelParams cold() const { return leg.at(omega_c, u); }
};

struct EngineBaths {
  double alpha = 1e-3, omega_cut = 10.0;
  double t_hot = 0.5, t_cold = 0.1;
  BathSpec hot() const { return {alpha, omega_cut, t_hot}; }
  BathSpec cold() const { return {alpha, omega_cut, t_cold}; }
};

struct EngineOptions {
  BasisConfig basis;
  int n_kept = 40;
  double atomic_scale = 1.0;
  FrictionRef friction_ref = FrictionRef::Gibbs;
  ModeConvention convention = ModeConvention::Standard;
  AdiabaticOptions adiabatic;
};

struct StrokeRecord {
  int stroke_index = 0;
  StrokeKind kind = StrokeKind::IsochoricHot;
  double heat = 0.0;
  double work_on_system = 0.0;
  double energy_start = 0.0, energy_end = 0.0;
  std::shared_ptr<const DensityMatrix> state_end;  // state handed to the next stroke
  double projection_loss = 0.0;  // weight lost moving into the next eigenbasis
  std::optional<AdiabaticTranscript> transcript;
};

struct CycleReport {
  int cycle = 0;  // 1-based
  std::vector<StrokeRecord> strokes;
  double q_hot = 0.0, q_cold = 0.0, work = 0.0;
  std::optional<double> efficiency;
  std::optional<double> eta_via_entropy;
  std::optional<double> power;
  double entropy_total = 0.0;
  double friction_expand = 0.0, friction_compress = 0.0;
  // F(rho^(m-1), rho^(m)) between the states after m-1 and m cycles (rho^(0) = initial state)
  std::optional<double> fidelity;
  bool steady = false;
  Mode mode = Mode::Idle;
  double first_law_residual = 0.0;  // Q_h + Q_c - W
  std::shared_ptr<const DensityMatrix> state_end;
};

// T D(rho || rho_ref)
inline double friction(const DensityMatrix& rho, const DensityMatrix& ref, double T) {
  return T * relative_entropy(rho, ref);
}

// Total entropy production from the four endpoint energies, with t1..t4 the ends of strokes 1..4:
//   Sigma = -[E_h(t1) - E_h(t4)] / T_h - [E_c(t3) - E_c(t2)] / T_c
struct EntropyBalance {
  double sigma = 0.0;
  std::optional<double> eta_th;  // eta_c - T_c Sigma / [E_h(t1) - E_h(t4)]
};

inline EntropyBalance entropy_production(double eh_t1, double ec_t2, double ec_t3, double eh_t4,
                                         double t_hot, double t_cold) {
  EntropyBalance b;
  const double qh = eh_t1 - eh_t4;
  b.sigma = -qh / t_hot - (ec_t3 - ec_t2) / t_cold;
  if (std::abs(qh) > 1e-14) b.eta_th = (1.0 - t_cold / t_hot) - t_cold * b.sigma / qh;
  return b;
}

inline double energy_of(const DensityMatrix& rho, const Eigen::VectorXd& E) {
  return (rho.matrix().diagonal().real().array() * E.array()).sum();
}

// Four-stroke Otto engine over a fixed pair of Hamiltonians. Spectra, channels and stroke
// propagators are built once and shared by every cycle run through this object.
class OttoEngine {
 public:
  OttoEngine(CycleParams cp, EngineBaths baths, EngineOptions opt)
      : cp_(cp), baths_(baths), opt_(opt) {
    opt_.basis.validate();
    if (!(cp_.omega_h > 0.0 && cp_.omega_c > 0.0)) throw ConfigError("engine: frequencies must be > 0");
    if (!(baths_.t_hot > 0.0 && baths_.t_cold > 0.0)) throw ConfigError("engine: temperatures must be > 0");
    baths_.hot().validate();
    const DiagonalizeOptions d{.eigenvectors = true, .certify = true, .n_kept = opt_.n_kept};
    hot_spec_ = std::make_shared<Spectrum>(diagonalize(cp_.hot(), opt_.basis, d));
    cold_spec_ = std::make_shared<Spectrum>(diagonalize(cp_.cold(), opt_.basis, d));
    hot_ = std::make_shared<DressedChannelSet>(
        build_channels(*hot_spec_, opt_.n_kept, opt_.basis.fock_cutoff, opt_.atomic_scale));
    cold_ = std::make_shared<DressedChannelSet>(
        build_channels(*cold_spec_, opt_.n_kept, opt_.basis.fock_cutoff, opt_.atomic_scale));
  }

  const DressedChannelSet& hot_channels() const { return *hot_; }
  const DressedChannelSet& cold_channels() const { return *cold_; }
  const Spectrum& hot_spectrum() const { return *hot_spec_; }
  const Spectrum& cold_spectrum() const { return *cold_spec_; }
  const CycleParams& cycle_params() const { return cp_; }
  const EngineBaths& baths() const { return baths_; }

  DensityMatrix hot_gibbs() const { return gibbs_state(*hot_, baths_.t_hot); }

  CycleReport run_cycle(const DensityMatrix& start, const StrokeSchedule& sch) {
    sch.validate();
    detail::require_channels(start, *hot_);
    const Eigen::VectorXd& Eh = hot_->energies;
    const Eigen::VectorXd& Ec = cold_->energies;
    CycleReport r;
    const double e0 = energy_of(start, Eh);

    // 1: hot isochore
    auto iso1 = evolve_isochoric(start, *hot_, baths_.hot(), sch.tau1, sch.dt_isochoric, 0);
    const double eh_t1 = iso1.energies.back();
    r.strokes.push_back(isochoric_record(1, StrokeKind::IsochoricHot, e0, eh_t1, iso1.state));

    // 2: expansion omega_h -> omega_c
    auto [rho_c2, rec2] = adiabatic(2, StrokeKind::AdiabaticExpand, iso1.state, *hot_, *cold_,
                                    cp_.hot(), cp_.cold(), sch.tau2, sch.dt_adiabatic);
    r.strokes.push_back(rec2);
    const double ec_t2 = energy_of(rho_c2, Ec);

    // 3: cold isochore
    auto iso3 = evolve_isochoric(rho_c2, *cold_, baths_.cold(), sch.tau3, sch.dt_isochoric, 0);
    const double ec_t3 = iso3.energies.back();
    r.strokes.push_back(isochoric_record(3, StrokeKind::IsochoricCold, ec_t2, ec_t3, iso3.state));

    // 4: compression omega_c -> omega_h
    auto [rho_h4, rec4] = adiabatic(4, StrokeKind::AdiabaticCompress, iso3.state, *cold_, *hot_,
                                    cp_.cold(), cp_.hot(), sch.tau4, sch.dt_adiabatic);
    r.strokes.push_back(rec4);
    const double eh_t4 = energy_of(rho_h4, Eh);

    r.q_hot = r.strokes[0].heat;
    r.q_cold = r.strokes[2].heat;
    r.work = -(r.strokes[1].work_on_system + r.strokes[3].work_on_system);
    r.first_law_residual = r.q_hot + r.q_cold - r.work;
    r.mode = classify_mode(r.q_hot, r.q_cold, r.work, opt_.convention);
    if (r.q_hot > 1e-12 * std::max(1.0, std::abs(r.q_hot))) r.efficiency = r.work / r.q_hot;
    if (sch.period() > 0.0) r.power = r.work / sch.period();

    const EntropyBalance eb = entropy_production(eh_t1, ec_t2, ec_t3, eh_t4, baths_.t_hot, baths_.t_cold);
    r.entropy_total = eb.sigma;
    r.eta_via_entropy = eb.eta_th;

    r.friction_expand = baths_.t_hot * reference_divergence(rho_c2, *cold_, iso1.state, baths_.t_hot);
    r.friction_compress = baths_.t_cold * reference_divergence(rho_h4, *hot_, iso3.state, baths_.t_cold);
    r.state_end = std::make_shared<const DensityMatrix>(rho_h4);
    return r;
  }

  std::vector<CycleReport> run_engine(const StrokeSchedule& sch) {
    return run_engine(hot_gibbs(), sch);
  }

  std::vector<CycleReport> run_engine(const DensityMatrix& initial, const StrokeSchedule& sch) {
    sch.validate();
    std::vector<CycleReport> out;
    DensityMatrix cur = initial;
    for (int m = 1; m <= sch.n_cycles; ++m) {
      CycleReport r;
      try {
        r = run_cycle(cur, sch);
      } catch (const std::exception& e) {
        throw std::runtime_error("cycle " + std::to_string(m) + ": " + e.what());
      }
      r.cycle = m;
      r.fidelity = uhlmann_fidelity(cur, *r.state_end);
      r.steady = *r.fidelity > 1.0 - 1e-4;
      cur = *r.state_end;
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  StrokeRecord isochoric_record(int idx, StrokeKind kind, double e_start, double e_end,
                                const DensityMatrix& state) {
    StrokeRecord s;
    s.stroke_index = idx;
    s.kind = kind;
    s.energy_start = e_start;
    s.energy_end = e_end;
    s.heat = e_end - e_start;
    s.state_end = std::make_shared<const DensityMatrix>(state);
    return s;
  }

  // Eigenbasis(from) -> Fock -> ramp -> eigenbasis(to). Work uses the Fock-space energies.
  std::pair<DensityMatrix, StrokeRecord> adiabatic(int idx, StrokeKind kind, const DensityMatrix& rho,
                                                   const DressedChannelSet& from,
                                                   const DressedChannelSet& to, const ModelParams& a,
                                                   const ModelParams& b, double tau, double dt) {
    const Eigen::MatrixXd& Vf = from.fock.vectors;
    const DensityMatrix fock_in(FockRep{from.fock.space}, Vf * rho.matrix() * Vf.transpose());
    AdiabaticOptions ao = opt_.adiabatic;
    ao.dt = dt;
    ao.subspace_levels = std::max(ao.subspace_levels, opt_.n_kept);
    const auto prop = strokes_.get(a, b, opt_.basis, tau, ao);
    AdiabaticResult res = apply_stroke(*prop, fock_in);

    const Eigen::MatrixXd& Vt = to.fock.vectors;
    CMatrix m = Vt.transpose() * res.state.matrix() * Vt;
    const double kept = m.trace().real();
    m /= kept;
    DensityMatrix out(representation_of(to), m);

    StrokeRecord s;
    s.stroke_index = idx;
    s.kind = kind;
    s.work_on_system = res.work_on_system;
    s.energy_start = (prop->h_start * (prop->basis.transpose() * fock_in.matrix() * prop->basis)).trace().real();
    s.energy_end = s.energy_start + res.work_on_system;
    s.projection_loss = 1.0 - kept;
    s.transcript = res.transcript;
    s.state_end = std::make_shared<const DensityMatrix>(out);
    return {out, s};
  }

  // D(rho || ref) in the eigenbasis of `c`, with the reference either the Gibbs state at the
  // preceding bath temperature or the stroke's initial populations carried over by index.
  double reference_divergence(const DensityMatrix& rho, const DressedChannelSet& c,
                              const DensityMatrix& before, double T) const {
    Eigen::VectorXd logp;
    if (opt_.friction_ref == FrictionRef::Gibbs) {
      const Eigen::ArrayXd x = -(c.energies.array() - c.energies.minCoeff()) / T;
      logp = (x - std::log(x.exp().sum())).matrix();
    } else {
      const Eigen::VectorXd p = before.matrix().diagonal().real();
      logp = p.unaryExpr([](double x) { return std::log(std::max(x, 1e-300)); });
    }
    return relative_entropy_diagonal_log(rho.matrix(), logp);
  }

  CycleParams cp_;
  EngineBaths baths_;
  EngineOptions opt_;
  std::shared_ptr<Spectrum> hot_spec_, cold_spec_;
  std::shared_ptr<DressedChannelSet> hot_, cold_;
  StrokeCache strokes_;
};

inline std::vector<CycleReport> run_engine(const CycleParams& cp, const EngineBaths& baths,
                                           const StrokeSchedule& sch, const EngineOptions& opt = {}) {
  OttoEngine e(cp, baths, opt);
  return e.run_engine(sch);
}

}  // namespace dsotto
