#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dsotto/error.hpp"
#include "dsotto/fock.hpp"
#include "dsotto/functionals.hpp"
#include "dsotto/model.hpp"
#include "dsotto/spectrum.hpp"
#include "dsotto/thermostatics.hpp"

namespace dsotto {

struct BathSpec {
  double alpha = 1e-3;
  double omega_cut = 10.0;
  double temperature = 0.5;

  void validate() const {
    if (!(alpha > 0.0)) throw ConfigError("bath.alpha must be > 0");
    if (!(omega_cut > 0.0)) throw ConfigError("bath.omega_cut must be > 0");
    if (!(temperature > 0.0)) throw ConfigError("bath temperature must be > 0");
  }
};

// Ohmic spectral function pi alpha gap exp(-gap / omega_cut).
inline double spectral_rate(double gap, const BathSpec& b) {
  if (gap < 0.0) throw DomainError("spectral_rate: gap must be >= 0");
  return M_PI * b.alpha * gap * std::exp(-gap / b.omega_cut);
}

inline double bose_occupation(double gap, double T) {
  if (!(gap > 0.0)) throw DomainError("bose_occupation: gap must be > 0");
  if (!(T > 0.0)) throw DomainError("bose_occupation: T must be > 0");
  const double x = gap / T;
  if (x > 700.0) return 0.0;
  return 1.0 / std::expm1(x);
}

// Matrix elements of the two system-bath coupling operators between the lowest n_kept
// eigenstates. The atomic channel uses the lab-frame collective dipole J_+ + J_-,
// multiplied by atomic_scale.
struct DressedChannelSet {
  ModelParams params;
  BasisConfig basis;
  int n_kept = 0;
  Eigen::VectorXd energies;
  Eigen::MatrixXd s_boson, s_atom;
  FockVectors fock;  // eigenvectors in the bare representation, used by the engine
  double atomic_scale = 1.0;

  double gap(int j, int k) const { return energies[j] - energies[k]; }
};

inline DressedChannelSet build_channels(const Spectrum& s, int n_kept, int fock_cutoff,
                                        double atomic_scale = 1.0) {
  if (n_kept < 1 || n_kept > s.dim())
    throw ConfigError("build_channels: n_kept out of range (1.." + std::to_string(s.dim()) + ")");
  DressedChannelSet c{s.params, s.basis, n_kept};
  c.energies = s.energies.head(n_kept);
  c.fock = ecs_to_fock(s, 0, n_kept, fock_cutoff);
  c.atomic_scale = atomic_scale;
  const Eigen::MatrixXd& V = c.fock.vectors;
  c.s_boson = V.transpose() * (fock::quadrature(c.fock.space) * V);
  c.s_atom = atomic_scale * (V.transpose() * (fock::atomic_dipole(c.fock.space) * V));
  for (Eigen::MatrixXd* m : {&c.s_boson, &c.s_atom}) {
    *m = 0.5 * (*m + m->transpose());
    *m = m->unaryExpr([](double x) { return std::abs(x) < 1e-14 ? 0.0 : x; });
  }
  return c;
}

// rate(j, k) is the transition rate k -> j; out[k] is the total decay rate of level k.
struct TransitionRates {
  Eigen::MatrixXd rate;
  Eigen::VectorXd out;
};

// Gaps at or below this are treated as degenerate; gamma n and gamma (1 + n) then take
// their common limit pi alpha T |S|^2.
inline constexpr double kDegenerateGap = 1e-12;

inline TransitionRates transition_rates(const DressedChannelSet& c, const BathSpec& bath) {
  bath.validate();
  const int K = c.n_kept;
  TransitionRates r;
  r.rate.setZero(K, K);
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < j; ++k) {
      const double s2 = c.s_boson(j, k) * c.s_boson(j, k) + c.s_atom(j, k) * c.s_atom(j, k);
      if (s2 == 0.0) continue;
      const double gap = c.gap(j, k);
      if (gap <= kDegenerateGap) {
        const double g = M_PI * bath.alpha * bath.temperature * s2;
        r.rate(j, k) = g;
        r.rate(k, j) = g;
        continue;
      }
      const double G = spectral_rate(gap, bath) * s2;
      const double n = bose_occupation(gap, bath.temperature);
      r.rate(j, k) = G * n;          // absorption k -> j
      r.rate(k, j) = G * (1.0 + n);  // emission j -> k
    }
  r.out = r.rate.colwise().sum().transpose();
  return r;
}

struct EigenbasisRep {
  ModelParams params;
  BasisConfig basis;
  int n_kept;
  bool operator==(const EigenbasisRep& o) const {
    return params == o.params && basis == o.basis && n_kept == o.n_kept;
  }
};
struct FockRep {
  FockSpace space;
  bool operator==(const FockRep& o) const { return space == o.space; }
};
using Representation = std::variant<EigenbasisRep, FockRep>;

inline EigenbasisRep representation_of(const DressedChannelSet& c) {
  return {c.params, c.basis, c.n_kept};
}

// Hermitian, unit-trace, positive state tagged with the basis it is written in.
class DensityMatrix {
 public:
  DensityMatrix(Representation rep, CMatrix m) : rep_(std::move(rep)), m_(std::move(m)) {
    validate();
  }

  static DensityMatrix diagonal(Representation rep, const Eigen::VectorXd& p) {
    return {std::move(rep), p.cast<std::complex<double>>().asDiagonal().toDenseMatrix()};
  }

  const Representation& representation() const { return rep_; }
  const CMatrix& matrix() const { return m_; }
  int dim() const { return int(m_.rows()); }
  bool same_representation(const DensityMatrix& o) const { return rep_ == o.rep_; }
  double min_eigenvalue_before_clip() const { return min_eig_; }

 private:
  void validate() {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw DomainError("density matrix must be square and non-empty");
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) throw DomainError("density matrix not Hermitian (" + std::to_string(herm) + ")");
    m_ = 0.5 * (m_ + m_.adjoint());
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > 1e-9)
      throw DomainError("density matrix trace " + std::to_string(tr) + " differs from 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_);
    min_eig_ = es.eigenvalues().minCoeff();
    if (min_eig_ < -1e-9)
      throw DomainError("density matrix has negative eigenvalue " + std::to_string(min_eig_));
    if (min_eig_ < 0.0) {
      const Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
      m_ = es.eigenvectors() * (w / w.sum()).asDiagonal() * es.eigenvectors().adjoint();
    }
  }

  Representation rep_;
  CMatrix m_;
  double min_eig_ = 0.0;
};

inline void require_same(const DensityMatrix& a, const DensityMatrix& b, const char* who) {
  if (!a.same_representation(b)) throw ContractViolation(std::string(who) + ": representation mismatch");
}

inline double relative_entropy(const DensityMatrix& a, const DensityMatrix& b) {
  require_same(a, b, "relative_entropy");
  return relative_entropy(a.matrix(), b.matrix());
}
inline double uhlmann_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  require_same(a, b, "uhlmann_fidelity");
  return uhlmann_fidelity(a.matrix(), b.matrix());
}
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same(a, b, "trace_distance");
  return trace_distance(a.matrix(), b.matrix());
}

inline DensityMatrix gibbs_state(const DressedChannelSet& c, double T) {
  return DensityMatrix::diagonal(representation_of(c), gibbs(c.energies, T).populations);
}

namespace detail {

inline void require_channels(const DensityMatrix& rho, const DressedChannelSet& c) {
  const auto* rep = std::get_if<EigenbasisRep>(&rho.representation());
  if (!rep || !(*rep == representation_of(c)))
    throw ContractViolation("state is not in the eigenbasis of these channels");
}

// Dissipative part: populations feel sum_k rate(j,k) p_k - out_j p_j; each coherence
// rho_jk decays at (out_j + out_k) / 2.
inline CMatrix dissipator(const CMatrix& rho, const TransitionRates& r) {
  const int K = int(rho.rows());
  CMatrix d(K, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) d(j, k) = -0.5 * (r.out[j] + r.out[k]) * rho(j, k);
  const Eigen::VectorXd gain = r.rate * rho.diagonal().real();
  for (int j = 0; j < K; ++j) d(j, j) += gain[j];
  return d;
}

}  // namespace detail

// Right-hand side of the dressed master equation, including -i[H, rho].
inline CMatrix generator_apply(const DensityMatrix& rho, const DressedChannelSet& c,
                               const BathSpec& bath) {
  detail::require_channels(rho, c);
  const TransitionRates r = transition_rates(c, bath);
  const CMatrix& m = rho.matrix();
  CMatrix d = detail::dissipator(m, r);
  const std::complex<double> I(0.0, 1.0);
  for (int k = 0; k < c.n_kept; ++k)
    for (int j = 0; j < c.n_kept; ++j) d(j, k) -= I * (c.energies[j] - c.energies[k]) * m(j, k);
  return d;
}

struct IsochoricTrajectory {
  DensityMatrix state;
  std::vector<double> times;
  std::vector<double> energies;  // Tr(H rho(t))
  int steps = 0;
  double dt = 0.0;
  double heat() const { return energies.back() - energies.front(); }
};

// Fixed-step RK4 for the dressed master equation. The dissipator commutes with the
// Hamiltonian superoperator, so the integration runs on the interaction-picture state and the
// free phases are applied exactly at the end. record_every = 0 stores only the endpoints.
inline IsochoricTrajectory evolve_isochoric(const DensityMatrix& rho0, const DressedChannelSet& c,
                                            const BathSpec& bath, double tau, double dt,
                                            int record_every = 1) {
  detail::require_channels(rho0, c);
  if (!(tau >= 0.0)) throw DomainError("evolve_isochoric: tau must be >= 0");
  if (!(dt > 0.0)) throw DomainError("evolve_isochoric: dt must be > 0");
  const int n = tau == 0.0 ? 0 : int(std::ceil(tau / dt - 1e-9));
  const double h = n ? tau / n : 0.0;
  const TransitionRates r = transition_rates(c, bath);
  const Eigen::VectorXd& E = c.energies;

  CMatrix x = rho0.matrix();
  IsochoricTrajectory out{rho0, {0.0}, {(x.diagonal().real().array() * E.array()).sum()}, n, h};
  auto check = [&](int step) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(x, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-9)
      throw IntegrationError("evolve_isochoric: eigenvalue " + std::to_string(lo) + " at step " +
                             std::to_string(step) + " with dt = " + std::to_string(h) +
                             "; reduce the step");
  };
  for (int s = 1; s <= n; ++s) {
    const CMatrix k1 = detail::dissipator(x, r);
    const CMatrix k2 = detail::dissipator(x + 0.5 * h * k1, r);
    const CMatrix k3 = detail::dissipator(x + 0.5 * h * k2, r);
    const CMatrix k4 = detail::dissipator(x + h * k3, r);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((record_every > 0 && s % record_every == 0) || s == n) {
      out.times.push_back(s * h);
      out.energies.push_back((x.diagonal().real().array() * E.array()).sum());
    }
    if (s % 2000 == 0) check(s);
  }
  if (n) check(n);
  const std::complex<double> I(0.0, 1.0);
  for (int k = 0; k < c.n_kept; ++k)
    for (int j = 0; j < c.n_kept; ++j) x(j, k) *= std::exp(-I * (E[j] - E[k]) * tau);
  const double tr = x.trace().real();
  if (std::abs(tr - 1.0) > 1e-9)
    throw IntegrationError("evolve_isochoric: trace drifted to " + std::to_string(tr));
  try {
    out.state = DensityMatrix(rho0.representation(), x);
  } catch (const DomainError& e) {
    throw IntegrationError(std::string("evolve_isochoric: final state invalid: ") + e.what());
  }
  return out;
}

}  // namespace dsotto
