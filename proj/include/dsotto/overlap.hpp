#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "dsotto/error.hpp"

namespace dsotto {

namespace detail {

// log|L_n^{(a)}(x)| and its sign, by the three-term recurrence with periodic rescaling.
inline double log_laguerre(int n, double a, double x, double& sign) {
  double p0 = 1.0, p1 = 1.0 + a - x, logscale = 0.0;
  if (n == 0) {
    sign = 1.0;
    return 0.0;
  }
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0 + a - x) * p1 - (k + a) * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
    if (std::abs(p1) > 1e150) {
      p0 *= 1e-150;
      p1 *= 1e-150;
      logscale += 150.0 * std::log(10.0);
    }
  }
  sign = p1 < 0.0 ? -1.0 : 1.0;
  return p1 == 0.0 ? -INFINITY : std::log(std::abs(p1)) + logscale;
}

}  // namespace detail

// <l| exp(G (a - a^dagger)) |k>, the overlap between Fock ladders whose origins are
// displaced by G. Evaluated through the associated Laguerre closed form, which is free
// of the cancellation that the alternating finite series suffers for large l, k.
inline double displaced_overlap(int l, int k, double G) {
  if (l < 0 || k < 0)
    throw DomainError("displaced_overlap: negative index (" + std::to_string(l) + ", " +
                      std::to_string(k) + ")");
  if (!std::isfinite(G)) throw DomainError("displaced_overlap: non-finite displacement");
  if (G == 0.0) return l == k ? 1.0 : 0.0;

  const int lo = std::min(l, k);
  const int d = std::abs(l - k);
  const double x = G * G;
  double sign = 1.0;
  if (d % 2 == 1) {
    if (l > k) sign = -sign;
    if (G < 0.0) sign = -sign;
  }
  const double logpref =
      0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + d + 1.0)) + d * std::log(std::abs(G)) - 0.5 * x;
  double lsign = 1.0;
  const double logL = detail::log_laguerre(lo, double(d), x, lsign);
  if (!std::isfinite(logL)) return 0.0;
  return sign * lsign * std::exp(logpref + logL);
}

// O(l, k) = displaced_overlap(l, k, G) for l < rows, k < cols.
inline Eigen::MatrixXd overlap_matrix(int rows, int cols, double G) {
  Eigen::MatrixXd O(rows, cols);
  for (int k = 0; k < cols; ++k)
    for (int l = 0; l < rows; ++l) O(l, k) = displaced_overlap(l, k, G);
  return O;
}

}  // namespace dsotto
