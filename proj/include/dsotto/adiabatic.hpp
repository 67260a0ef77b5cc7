#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include <Eigen/Dense>

#include "dsotto/dynamics.hpp"
#include "dsotto/fock.hpp"
#include "dsotto/spectrum.hpp"

namespace dsotto {

struct AdiabaticOptions {
  double dt = 0.05;
  int subspace_levels = 60;  // eigenvectors taken at each ramp sample point
  int subspace_samples = 3;  // sample points along the ramp, endpoints included
  double rank_tol = 1e-9;    // relative pivot threshold when orthonormalizing
};

struct AdiabaticTranscript {
  double tau = 0.0, dt = 0.0;
  int steps = 0;
  int subspace_dim = 0;
  double weight_outside_subspace = 0.0;
  double work_endpoint = 0.0;   // Tr(H_end rho_end) - Tr(H_start rho_0)
  double work_integral = 0.0;   // integral of Tr(dH/dt rho(t)), Simpson on the step grid
  double work_mismatch = 0.0;   // |endpoint - integral| / max(|endpoint|, 1e-12)
  double purity_start = 0.0, purity_end = 0.0;
  double spectrum_drift = 0.0;  // max shift of the eigenvalues of rho
  double unitarity_error = 0.0;
};

// Propagator of one linear ramp (omega, delta) : start -> end at fixed lambda, u, N, restricted
// to an orthonormal subspace of the bare Fock (x) spin space.
//
// Steps use the fourth-order commutator-free Magnus scheme. Because H is linear in time, its two
// exponentials are exp(-i h/2 H(t + h/6)) followed by exp(-i h/2 H(t + 5h/6)).
struct StrokePropagator {
  FockSpace space;
  Eigen::MatrixXd basis;             // dim x M, orthonormal columns
  Eigen::MatrixXd h_start, h_end;    // subspace Hamiltonians at the ramp ends
  CMatrix unitary;                   // M x M
  CMatrix work_kernel;               // W_integral = Re Tr(work_kernel rho_0)
  double tau = 0.0, dt = 0.0;
  int steps = 0;
  double unitarity_error = 0.0;
};

namespace detail {

inline void require_ramp(const ModelParams& a, const ModelParams& b) {
  if (a.lambda() != b.lambda() || a.u() != b.u() || a.n_atoms() != b.n_atoms())
    throw ContractViolation("adiabatic stroke: only omega (and the tracking delta) may change");
}

inline Eigen::MatrixXd ramp_subspace(const ModelParams& a, const ModelParams& b,
                                     const BasisConfig& basis, int cutoff,
                                     const AdiabaticOptions& opt) {
  const int S = std::max(2, opt.subspace_samples);
  const int L = opt.subspace_levels;
  const FockSpace space{cutoff, a.n_atoms()};
  Eigen::MatrixXd A(space.dim(), 0);
  for (int i = 0; i < S; ++i) {
    const double s = double(i) / (S - 1);
    const ModelParams p(a.omega() + s * (b.omega() - a.omega()),
                        a.delta() + s * (b.delta() - a.delta()), a.lambda(), a.u(), a.n_atoms());
    const Spectrum sp = diagonalize(p, basis, {.eigenvectors = true, .certify = false});
    const FockVectors f = ecs_to_fock(sp, 0, std::min(L, sp.dim()), cutoff);
    Eigen::MatrixXd next(A.rows(), A.cols() + f.vectors.cols());
    next << A, f.vectors;
    A.swap(next);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(opt.rank_tol);
  const int r = int(qr.rank());
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), r);
  return Q;
}

}  // namespace detail

inline StrokePropagator build_stroke(const ModelParams& start, const ModelParams& end,
                                     const BasisConfig& basis, double tau,
                                     const AdiabaticOptions& opt = {}) {
  detail::require_ramp(start, end);
  if (!(tau >= 0.0)) throw DomainError("adiabatic stroke: tau must be >= 0");
  if (!(opt.dt > 0.0)) throw DomainError("adiabatic stroke: dt must be > 0");
  StrokePropagator P;
  P.space = FockSpace{basis.fock_cutoff, start.n_atoms()};
  P.basis = detail::ramp_subspace(start, end, basis, basis.fock_cutoff, opt);
  const Eigen::MatrixXd& B = P.basis;
  const int M = int(B.cols());

  const FockHamiltonianParts parts = fock_hamiltonian_parts(start, basis.fock_cutoff);
  const Eigen::MatrixXd Nb = B.transpose() * (parts.number * B);
  const Eigen::MatrixXd Sb = B.transpose() * (parts.spin_x2 * B);
  const Eigen::MatrixXd Rb = B.transpose() * (parts.rest * B);
  auto H_at = [&](double s) -> Eigen::MatrixXd {
    const double w = start.omega() + s * (end.omega() - start.omega());
    const double d = start.delta() + s * (end.delta() - start.delta());
    return w * Nb - 0.5 * d * Sb + Rb;
  };
  P.h_start = H_at(0.0);
  P.h_end = H_at(1.0);
  // dH/ds; dH/dt = dH/ds / tau
  const Eigen::MatrixXd C1 = P.h_end - P.h_start;

  P.tau = tau;
  P.unitary = CMatrix::Identity(M, M);
  if (tau == 0.0) {
    P.work_kernel = C1.cast<std::complex<double>>();
    return P;
  }
  int n = int(std::ceil(tau / opt.dt - 1e-9));
  n += n % 2;  // Simpson needs an even count
  const double h = tau / n;
  P.steps = n;
  P.dt = h;

  const std::complex<double> I(0.0, 1.0);
  // A constant energy shift only changes a global phase, which drops out of rho.
  auto half_step = [&](double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_at(t / tau));
    if (es.info() != Eigen::Success) throw ComputationError("ramp eigensolver failed", std::size_t(M));
    const Eigen::MatrixXd& V = es.eigenvectors();
    const Eigen::VectorXcd ph = (-I * (0.5 * h) * es.eigenvalues().cast<std::complex<double>>()).array().exp();
    const CMatrix tmp = ph.asDiagonal() * (V.transpose() * P.unitary);
    P.unitary = V * tmp;
  };
  auto kernel_term = [&]() -> CMatrix {
    return P.unitary.adjoint() * (C1 * P.unitary);
  };
  CMatrix acc = kernel_term();  // Simpson weights 1, 4, 2, ..., 4, 1
  for (int k = 0; k < n; ++k) {
    const double t = k * h;
    half_step(t + h / 6.0);
    half_step(t + 5.0 * h / 6.0);
    const double w = (k + 1 == n) ? 1.0 : ((k + 1) % 2 ? 4.0 : 2.0);
    acc += w * kernel_term();
  }
  P.work_kernel = (h / 3.0 / tau) * acc;
  P.unitarity_error = (P.unitary.adjoint() * P.unitary - CMatrix::Identity(M, M)).cwiseAbs().maxCoeff();
  return P;
}

struct AdiabaticResult {
  DensityMatrix state;  // Fock representation
  double work_on_system = 0.0;
  AdiabaticTranscript transcript;
};

// Applies a stroke propagator to a Fock-representation state.
inline AdiabaticResult apply_stroke(const StrokePropagator& P, const DensityMatrix& rho0) {
  const auto* rep = std::get_if<FockRep>(&rho0.representation());
  if (!rep || !(rep->space == P.space))
    throw ContractViolation("adiabatic stroke: state must be in the stroke's Fock representation");
  const Eigen::MatrixXd& B = P.basis;
  const CMatrix rs = B.transpose() * rho0.matrix() * B;
  const CMatrix re = P.unitary * rs * P.unitary.adjoint();

  AdiabaticTranscript t;
  t.tau = P.tau;
  t.dt = P.dt;
  t.steps = P.steps;
  t.subspace_dim = int(B.cols());
  t.weight_outside_subspace = 1.0 - rs.trace().real();
  t.work_endpoint = (P.h_end * re).trace().real() - (P.h_start * rs).trace().real();
  t.work_integral = (P.work_kernel * rs).trace().real();
  t.work_mismatch = std::abs(t.work_endpoint - t.work_integral) / std::max(std::abs(t.work_endpoint), 1e-12);
  t.purity_start = purity(rs);
  t.purity_end = purity(re);
  t.unitarity_error = P.unitarity_error;
  {
    Eigen::SelfAdjointEigenSolver<CMatrix> a(rs, Eigen::EigenvaluesOnly), b(re, Eigen::EigenvaluesOnly);
    t.spectrum_drift = (a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff();
  }
  if (std::abs(t.purity_end - t.purity_start) > 1e-6)
    throw IntegrationError("adiabatic stroke: purity drifted by " +
                           std::to_string(t.purity_end - t.purity_start) + " with dt = " +
                           std::to_string(P.dt) + "; reduce the step");
  if (t.weight_outside_subspace > 1e-6)
    throw RepresentationError("adiabatic stroke: state has weight " +
                              std::to_string(t.weight_outside_subspace) +
                              " outside the ramp subspace; raise subspace_levels");
  CMatrix full = B * re * B.transpose();
  return {DensityMatrix(rho0.representation(), full), t.work_endpoint, t};
}

// Time-dependent unitary ramp omega(t) = omega_start + (t/tau)(omega_end - omega_start).
inline AdiabaticResult evolve_adiabatic(const DensityMatrix& rho0, const ModelParams& start,
                                        const ModelParams& end, const BasisConfig& basis,
                                        double tau, const AdiabaticOptions& opt = {}) {
  return apply_stroke(build_stroke(start, end, basis, tau, opt), rho0);
}

// Insert-once cache of stroke propagators keyed by ramp, duration and step.
class StrokeCache {
 public:
  std::shared_ptr<const StrokePropagator> get(const ModelParams& a, const ModelParams& b,
                                              const BasisConfig& basis, double tau,
                                              const AdiabaticOptions& opt) {
    const Key k{a, b, basis, tau, opt.dt, opt.subspace_levels, opt.subspace_samples, opt.rank_tol};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = map_.find(k);
      if (it != map_.end()) return it->second;
    }
    auto p = std::make_shared<const StrokePropagator>(build_stroke(a, b, basis, tau, opt));
    std::lock_guard<std::mutex> lock(mu_);
    return map_.emplace(k, std::move(p)).first->second;
  }

 private:
  using Key = std::tuple<ModelParams, ModelParams, BasisConfig, double, double, int, int, double>;
  std::mutex mu_;
  std::map<Key, std::shared_ptr<const StrokePropagator>> map_;
};

}  // namespace dsotto
