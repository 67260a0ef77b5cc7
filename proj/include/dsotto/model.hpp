#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <tuple>

#include "dsotto/error.hpp"

namespace dsotto {

// One point (omega, delta, lambda, u, N) of the Dicke-Stark parameter space.
class ModelParams {
 public:
  ModelParams(double omega, double delta, double lambda, double u, int n_atoms)
      : omega_(omega), delta_(delta), lambda_(lambda), u_(u), n_atoms_(n_atoms) {
    if (!(std::isfinite(omega) && omega > 0.0))
      throw DomainError("omega must be > 0 (got " + num(omega) + ")");
    if (!(std::isfinite(delta) && delta > 0.0))
      throw DomainError("delta must be > 0 (got " + num(delta) + ")");
    if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
    if (n_atoms < 1) throw DomainError("n_atoms must be >= 1 (got " + std::to_string(n_atoms) + ")");
    if (!(std::isfinite(u) && std::abs(u) < omega))
      throw DomainError("|u| < omega violated: u = " + num(u) + ", omega = " + num(omega));
  }

  double omega() const { return omega_; }
  double delta() const { return delta_; }
  double lambda() const { return lambda_; }
  double u() const { return u_; }
  int n_atoms() const { return n_atoms_; }

  double j() const { return 0.5 * n_atoms_; }
  int n_sectors() const { return n_atoms_ + 1; }
  // Unit displacement G = 2 lambda / (omega sqrt N); sector m is shifted by g_m = G m.
  double shift_unit() const { return 2.0 * lambda_ / (omega_ * std::sqrt(double(n_atoms_))); }
  // J_z quantum number of sector index i (i = 0 is m = -j).
  double m_of(int i) const { return double(i) - j(); }
  double displacement(int i) const { return shift_unit() * m_of(i); }

  ModelParams with_omega(double w) const { return {w, delta_, lambda_, u_, n_atoms_}; }
  ModelParams with_lambda(double l) const { return {omega_, delta_, l, u_, n_atoms_}; }
  ModelParams with_u(double v) const { return {omega_, delta_, lambda_, v, n_atoms_}; }

  auto tie() const { return std::tie(omega_, delta_, lambda_, u_, n_atoms_); }
  bool operator==(const ModelParams& o) const { return tie() == o.tie(); }
  bool operator<(const ModelParams& o) const { return tie() < o.tie(); }

  std::string describe() const {
    std::ostringstream os;
    os.precision(12);
    os << "omega=" << omega_ << " delta=" << delta_ << " lambda=" << lambda_ << " u=" << u_
       << " N=" << n_atoms_;
    return os.str();
  }

 private:
  static std::string num(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
  }

  double omega_, delta_, lambda_, u_;
  int n_atoms_;
};

struct BasisConfig {
  int n_tr = 60;
  int fock_cutoff = 120;
  double convergence_rel_tol = 1e-4;
  int n_levels_checked = 20;

  void validate() const {
    if (n_tr < 1) throw ConfigError("basis.n_tr must be >= 1");
    if (fock_cutoff < n_tr) throw ConfigError("basis.fock_cutoff must be >= basis.n_tr");
    if (!(convergence_rel_tol > 0.0)) throw ConfigError("basis.convergence_rel_tol must be > 0");
    if (n_levels_checked < 1) throw ConfigError("basis.n_levels_checked must be >= 1");
  }
  auto tie() const { return std::tie(n_tr, fock_cutoff, convergence_rel_tol, n_levels_checked); }
  bool operator==(const BasisConfig& o) const { return tie() == o.tie(); }
  bool operator<(const BasisConfig& o) const { return tie() < o.tie(); }
};

// Parameters of one Otto working substance. The hot and cold legs differ in omega
// (and, with delta_tracks_omega, in the qubit splitting, which keeps delta/omega fixed).
struct LegSpec {
  double lambda = 0.47;
  double delta = 1.0;  // qubit splitting at the reference frequency omega_ref
  double omega_ref = 1.0;
  int n_atoms = 2;
  bool delta_tracks_omega = true;

  double delta_at(double omega) const {
    return delta_tracks_omega ? delta * omega / omega_ref : delta;
  }
  ModelParams at(double omega, double u) const {
    return {omega, delta_at(omega), lambda, u, n_atoms};
  }
};

}  // namespace dsotto
