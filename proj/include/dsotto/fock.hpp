#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dsotto/model.hpp"

namespace dsotto {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Truncated bare Fock (x) collective-spin space in the rotated frame.
// Index of |n, m> is i_m (cutoff + 1) + n with i_m = m + j.
struct FockSpace {
  int cutoff = 120;
  int n_atoms = 2;

  int n_photon_states() const { return cutoff + 1; }
  int n_sectors() const { return n_atoms + 1; }
  int dim() const { return n_sectors() * n_photon_states(); }
  int index(int sector, int n) const { return sector * n_photon_states() + n; }
  double m_of(int sector) const { return sector - 0.5 * n_atoms; }
  bool operator==(const FockSpace& o) const { return cutoff == o.cutoff && n_atoms == o.n_atoms; }
};

namespace fock {

inline SparseMatrix from_triplets(int dim, const std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix M(dim, dim);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

// a^dagger a (x) 1
inline SparseMatrix number(const FockSpace& s) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < s.n_sectors(); ++i)
    for (int n = 1; n <= s.cutoff; ++n) t.emplace_back(s.index(i, n), s.index(i, n), n);
  return from_triplets(s.dim(), t);
}

// (a + a^dagger) (x) 1
inline SparseMatrix quadrature(const FockSpace& s) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < s.n_sectors(); ++i)
    for (int n = 0; n < s.cutoff; ++n) {
      const double v = std::sqrt(n + 1.0);
      t.emplace_back(s.index(i, n + 1), s.index(i, n), v);
      t.emplace_back(s.index(i, n), s.index(i, n + 1), v);
    }
  return from_triplets(s.dim(), t);
}

// 1 (x) J_z
inline SparseMatrix spin_z(const FockSpace& s) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < s.n_sectors(); ++i)
    if (s.m_of(i) != 0.0)
      for (int n = 0; n <= s.cutoff; ++n) t.emplace_back(s.index(i, n), s.index(i, n), s.m_of(i));
  return from_triplets(s.dim(), t);
}

// 1 (x) (J_+ + J_-)
inline SparseMatrix spin_x2(const FockSpace& s) {
  std::vector<Eigen::Triplet<double>> t;
  const double j = 0.5 * s.n_atoms;
  for (int i = 0; i + 1 < s.n_sectors(); ++i) {
    const double m = s.m_of(i);
    const double c = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    for (int n = 0; n <= s.cutoff; ++n) {
      t.emplace_back(s.index(i + 1, n), s.index(i, n), c);
      t.emplace_back(s.index(i, n), s.index(i + 1, n), c);
    }
  }
  return from_triplets(s.dim(), t);
}

// Pi |n, m> = (-1)^n |n, -m>
inline SparseMatrix parity(const FockSpace& s) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < s.n_sectors(); ++i)
    for (int n = 0; n <= s.cutoff; ++n)
      t.emplace_back(s.index(s.n_sectors() - 1 - i, n), s.index(i, n), n % 2 ? -1.0 : 1.0);
  return from_triplets(s.dim(), t);
}

// Lab-frame collective dipole J_+ + J_- = 2 J_x, which the rotation maps onto 2 J_z.
inline SparseMatrix atomic_dipole(const FockSpace& s) { return 2.0 * spin_z(s); }

}  // namespace fock

// Split of the rotated Hamiltonian into pieces that scale with omega, with delta, and the rest:
// H = omega N - (delta/2) Sx2 + [ -(u/2N) N Sx2 + (2 lambda/sqrt N) X Jz ].
struct FockHamiltonianParts {
  SparseMatrix number, spin_x2, rest;

  SparseMatrix at(double omega, double delta) const {
    SparseMatrix H = omega * number - 0.5 * delta * spin_x2 + rest;
    H.makeCompressed();
    return H;
  }
};

inline FockHamiltonianParts fock_hamiltonian_parts(const ModelParams& p, int cutoff) {
  const FockSpace s{cutoff, p.n_atoms()};
  const double N = p.n_atoms();
  FockHamiltonianParts parts;
  parts.number = fock::number(s);
  parts.spin_x2 = fock::spin_x2(s);
  SparseMatrix nx = parts.number * parts.spin_x2;
  SparseMatrix xz = fock::quadrature(s) * fock::spin_z(s);
  parts.rest = -(p.u() / (2.0 * N)) * nx + (2.0 * p.lambda() / std::sqrt(N)) * xz;
  parts.rest.makeCompressed();
  return parts;
}

inline SparseMatrix fock_hamiltonian(const ModelParams& p, int cutoff) {
  return fock_hamiltonian_parts(p, cutoff).at(p.omega(), p.delta());
}

}  // namespace dsotto
