#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "dsotto/error.hpp"

namespace dsotto {

using CMatrix = Eigen::MatrixXcd;

namespace detail {

inline Eigen::SelfAdjointEigenSolver<CMatrix> hermitian_eig(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success)
    throw ComputationError("Hermitian eigensolver failed", std::size_t(m.rows()));
  return es;
}

inline void check_same_shape(const CMatrix& a, const CMatrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ContractViolation(std::string(who) + ": operands differ in dimension");
}

// Hermitian square root with negative eigenvalues clipped to zero.
inline CMatrix psd_sqrt(const CMatrix& m) {
  const auto es = hermitian_eig(m);
  const Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

inline double purity(const CMatrix& rho) { return (rho * rho).trace().real(); }

// -Tr rho ln rho; eigenvalues below 1e-14 contribute nothing.
inline double entropy(const CMatrix& rho) {
  const auto es = detail::hermitian_eig(rho);
  double s = 0.0;
  for (double p : es.eigenvalues())
    if (p > 1e-14) s -= p * std::log(p);
  return s;
}

// Tr rho (ln rho - ln sigma). sigma's eigenvalues are clipped at 1e-14; weight of rho
// above 1e-8 on the clipped part of sigma's spectrum is a support failure.
inline double relative_entropy(const CMatrix& rho, const CMatrix& sigma) {
  detail::check_same_shape(rho, sigma, "relative_entropy");
  const auto er = detail::hermitian_eig(rho);
  const auto es = detail::hermitian_eig(sigma);
  double d = 0.0;
  for (double p : er.eigenvalues())
    if (p > 1e-14) d += p * std::log(p);
  const CMatrix& V = es.eigenvectors();
  const Eigen::VectorXd w = (V.adjoint() * rho * V).diagonal().real();
  double outside = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const double s = es.eigenvalues()[i];
    if (s < 1e-14) outside += w[i];
    d -= w[i] * std::log(std::max(s, 1e-14));
  }
  if (outside > 1e-8)
    throw SupportError("relative_entropy: rho has weight " + std::to_string(outside) +
                       " outside the support of sigma");
  return d;
}

// Relative entropy against a state diagonal in the same basis whose log-populations are given
// analytically, e.g. a Gibbs state ln p_n = -(E_n - E_0)/T - ln sum_m exp(-(E_m - E_0)/T).
// Avoids clipping the far tail of the reference.
inline double relative_entropy_diagonal_log(const CMatrix& rho, const Eigen::VectorXd& log_p) {
  if (rho.rows() != log_p.size())
    throw ContractViolation("relative_entropy_diagonal_log: dimension mismatch");
  const auto er = detail::hermitian_eig(rho);
  double d = 0.0;
  for (double p : er.eigenvalues())
    if (p > 1e-14) d += p * std::log(p);
  d -= (rho.diagonal().real().array() * log_p.array()).sum();
  return d;
}

// Tr sqrt( sqrt(rho) sigma sqrt(rho) ).
inline double uhlmann_fidelity(const CMatrix& rho, const CMatrix& sigma) {
  detail::check_same_shape(rho, sigma, "uhlmann_fidelity");
  const CMatrix r = detail::psd_sqrt(rho);
  const auto es = detail::hermitian_eig(r * sigma * r);
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

inline double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  detail::check_same_shape(rho, sigma, "trace_distance");
  const auto es = detail::hermitian_eig(rho - sigma);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace dsotto
