#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dsotto/error.hpp"
#include "dsotto/fock.hpp"
#include "dsotto/model.hpp"
#include "dsotto/overlap.hpp"

namespace dsotto {

struct EcsAssembly {
  Eigen::MatrixXd matrix;  // raw, before symmetrization
  double asymmetry = 0.0;  // max |H - H^T| / max |H|
};

// Rotated Hamiltonian
//   H = omega a^dag a - (delta/2 + u/(2N) a^dag a)(J_+ + J_-) + (2 lambda/sqrt N)(a + a^dag) J_z
// in the displaced ladders |k>_m = D(-g_m)|k> (x) |m>. Both off-diagonal blocks of each
// sector pair are computed independently so that the symmetry check means something.
inline EcsAssembly assemble_hamiltonian_ecs(const ModelParams& p, int n_tr) {
  const int nk = n_tr + 1;
  const int S = p.n_sectors();
  const double N = p.n_atoms();
  const double j = p.j();
  const double G0 = p.shift_unit();
  const double half_delta = 0.5 * p.delta();
  const double stark = p.u() / (2.0 * N);

  EcsAssembly out;
  Eigen::MatrixXd& H = out.matrix;
  H.setZero(S * nk, S * nk);

  // rows index the target ladder, columns run one past n_tr for the A^dagger term
  const Eigen::MatrixXd O_up = overlap_matrix(nk, nk + 1, -G0);  // m -> m + 1
  const Eigen::MatrixXd O_dn = overlap_matrix(nk, nk + 1, G0);   // m -> m - 1

  for (int i = 0; i < S; ++i) {
    const double m = p.m_of(i);
    const double g = p.displacement(i);
    for (int k = 0; k < nk; ++k) H(i * nk + k, i * nk + k) = p.omega() * (k - g * g);

    for (int dir : {+1, -1}) {
      const int t = i + dir;
      if (t < 0 || t >= S) continue;
      const double c = std::sqrt(j * (j + 1.0) - m * (m + dir));
      const Eigen::MatrixXd& O = dir > 0 ? O_up : O_dn;
      for (int k = 0; k < nk; ++k) {
        const double sk = std::sqrt(double(k)), sk1 = std::sqrt(k + 1.0);
        for (int l = 0; l < nk; ++l) {
          const double o = O(l, k);
          double n_elem = (k + g * g) * o - g * sk1 * O(l, k + 1);
          if (k > 0) n_elem -= g * sk * O(l, k - 1);
          H(t * nk + l, i * nk + k) = c * (-half_delta * o - stark * n_elem);
        }
      }
    }
  }
  const double scale = H.cwiseAbs().maxCoeff();
  out.asymmetry = scale > 0.0 ? (H - H.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  return out;
}

inline Eigen::MatrixXd build_hamiltonian_ecs(const ModelParams& p, const BasisConfig& basis) {
  basis.validate();
  EcsAssembly a = assemble_hamiltonian_ecs(p, basis.n_tr);
  if (a.asymmetry > 1e-10)
    throw BasisAssemblyError("ECS Hamiltonian asymmetry " + std::to_string(a.asymmetry) +
                             " exceeds 1e-10 for " + p.describe());
  Eigen::MatrixXd H = 0.5 * (a.matrix + a.matrix.transpose());
  return H;
}

// Symmetric/antisymmetric combinations of |k, m> and |k, -m>, which are eigenvectors of
// parity Pi |k, m> = (-1)^k |k, -m>.
struct ParityBlock {
  int parity = 1;
  std::vector<std::array<int, 2>> index;
  std::vector<std::array<double, 2>> coef;
  int size() const { return int(index.size()); }
};

inline std::array<ParityBlock, 2> parity_blocks(int n_sectors, int n_tr) {
  const int nk = n_tr + 1;
  std::array<ParityBlock, 2> b;
  b[0].parity = 1;
  b[1].parity = -1;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n_sectors; ++i) {
    const int mirror = n_sectors - 1 - i;
    if (i > mirror) continue;
    for (int k = 0; k < nk; ++k) {
      const double s = k % 2 ? -1.0 : 1.0;
      const int a = i * nk + k;
      if (i == mirror) {
        b[s > 0 ? 0 : 1].index.push_back({a, a});
        b[s > 0 ? 0 : 1].coef.push_back({1.0, 0.0});
      } else {
        const int c = mirror * nk + k;
        b[0].index.push_back({a, c});
        b[0].coef.push_back({r, s * r});
        b[1].index.push_back({a, c});
        b[1].coef.push_back({r, -s * r});
      }
    }
  }
  return b;
}

inline Eigen::MatrixXd project_block(const Eigen::MatrixXd& H, const ParityBlock& b) {
  const int n = b.size();
  Eigen::MatrixXd B(n, n);
  for (int q = 0; q < n; ++q)
    for (int p = 0; p <= q; ++p) {
      double v = 0.0;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          if (b.coef[p][x] != 0.0 && b.coef[q][y] != 0.0)
            v += b.coef[p][x] * b.coef[q][y] * H(b.index[p][x], b.index[q][y]);
      B(p, q) = B(q, p) = v;
    }
  return B;
}

struct Spectrum {
  ModelParams params;
  BasisConfig basis;
  Eigen::VectorXd energies;     // ascending
  Eigen::MatrixXd eigvecs_ecs;  // columns; empty when only eigenvalues were requested
  std::vector<int> parity;      // +1 / -1 per level
  bool converged = false;
  bool certified = false;  // whether the n_tr + 10 comparison was run
  double convergence_shift = std::numeric_limits<double>::quiet_NaN();
  int n_kept = 40;
  double asymmetry = 0.0;

  int dim() const { return int(energies.size()); }
  bool has_vectors() const { return eigvecs_ecs.cols() > 0; }
};

struct DiagonalizeOptions {
  bool eigenvectors = true;
  bool certify = true;
  int n_kept = 40;
};

namespace detail {

struct BlockSolution {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
  std::vector<int> parity;
};

inline BlockSolution solve_blocks(const Eigen::MatrixXd& H, int n_sectors, int n_tr, bool vectors) {
  const auto blocks = parity_blocks(n_sectors, n_tr);
  std::array<Eigen::VectorXd, 2> e;
  std::array<Eigen::MatrixXd, 2> v;
  for (int b = 0; b < 2; ++b) {
    if (blocks[b].size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        project_block(H, blocks[b]), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw ComputationError("symmetric eigensolver failed", std::size_t(H.rows()));
    e[b] = es.eigenvalues();
    if (vectors) v[b] = es.eigenvectors();
  }
  const int dim = int(H.rows());
  BlockSolution s;
  s.energies.resize(dim);
  s.parity.resize(dim);
  if (vectors) s.vectors.setZero(dim, dim);
  int ia = 0, ib = 0;
  const int na = int(e[0].size()), nb = int(e[1].size());
  for (int n = 0; n < dim; ++n) {
    const bool take_even = ib >= nb || (ia < na && e[0][ia] <= e[1][ib]);
    const int b = take_even ? 0 : 1;
    const int c = take_even ? ia++ : ib++;
    s.energies[n] = e[b][c];
    s.parity[n] = blocks[b].parity;
    if (vectors)
      for (int r = 0; r < blocks[b].size(); ++r)
        for (int x = 0; x < 2; ++x)
          if (blocks[b].coef[r][x] != 0.0)
            s.vectors(blocks[b].index[r][x], n) += blocks[b].coef[r][x] * v[b](r, c);
  }
  return s;
}

}  // namespace detail

// Full symmetric eigendecomposition, block-diagonalized by parity. The certificate
// compares the lowest n_levels_checked levels against a run at n_tr + 10 using
// |E - E'| <= tol * max(|E'|, 1).
inline Spectrum diagonalize(const ModelParams& p, const BasisConfig& basis,
                            const DiagonalizeOptions& opt = {}) {
  basis.validate();
  EcsAssembly a = assemble_hamiltonian_ecs(p, basis.n_tr);
  if (a.asymmetry > 1e-10)
    throw BasisAssemblyError("ECS Hamiltonian asymmetry " + std::to_string(a.asymmetry) +
                             " exceeds 1e-10 for " + p.describe());
  const Eigen::MatrixXd H = 0.5 * (a.matrix + a.matrix.transpose());
  auto sol = detail::solve_blocks(H, p.n_sectors(), basis.n_tr, opt.eigenvectors);

  Spectrum s{p, basis};
  s.energies = std::move(sol.energies);
  s.eigvecs_ecs = std::move(sol.vectors);
  s.parity = std::move(sol.parity);
  s.n_kept = std::min(opt.n_kept, s.dim());
  s.asymmetry = a.asymmetry;

  if (opt.certify) {
    const int ref_tr = basis.n_tr + 10;
    EcsAssembly r = assemble_hamiltonian_ecs(p, ref_tr);
    const Eigen::MatrixXd Hr = 0.5 * (r.matrix + r.matrix.transpose());
    auto ref = detail::solve_blocks(Hr, p.n_sectors(), ref_tr, false);
    const int n = std::min(basis.n_levels_checked, s.dim());
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(s.energies[i] - ref.energies[i]) /
                                  std::max(std::abs(ref.energies[i]), 1.0));
    s.convergence_shift = worst;
    s.converged = worst < basis.convergence_rel_tol;
    s.certified = true;
  }
  return s;
}

// Converted eigenvectors in the bare Fock (x) spin basis of the rotated frame.
struct FockVectors {
  FockSpace space;
  Eigen::MatrixXd vectors;   // columns, renormalized
  Eigen::VectorXd deficiency;  // 1 - ||v|| before renormalization
  std::vector<bool> flagged;   // deficiency > 1e-6
};

// Columns [first, first + count) of the spectrum, expanded via <n|k>_m = <n|D(-g_m)|k>.
inline FockVectors ecs_to_fock(const Spectrum& s, int first, int count, int fock_cutoff) {
  if (!s.has_vectors()) throw ContractViolation("ecs_to_fock: spectrum has no eigenvectors");
  if (fock_cutoff < s.basis.n_tr)
    throw ConfigError("ecs_to_fock: fock_cutoff must be >= n_tr");
  if (first < 0 || count < 0 || first + count > s.dim())
    throw ContractViolation("ecs_to_fock: level range out of bounds");
  const ModelParams& p = s.params;
  const int nk = s.basis.n_tr + 1;
  FockVectors out;
  out.space = FockSpace{fock_cutoff, p.n_atoms()};
  const int nf = fock_cutoff + 1;
  out.vectors.setZero(out.space.dim(), count);
  for (int i = 0; i < p.n_sectors(); ++i) {
    const Eigen::MatrixXd T = overlap_matrix(nf, nk, p.displacement(i));
    out.vectors.middleRows(i * nf, nf).noalias() =
        T * s.eigvecs_ecs.block(i * nk, first, nk, count);
  }
  out.deficiency.resize(count);
  out.flagged.assign(count, false);
  for (int c = 0; c < count; ++c) {
    const double norm = out.vectors.col(c).norm();
    out.deficiency[c] = 1.0 - norm;
    if (out.deficiency[c] > 1e-3)
      throw RepresentationError("ecs_to_fock: level " + std::to_string(first + c) +
                                " lost " + std::to_string(out.deficiency[c]) +
                                " of its norm at fock_cutoff " + std::to_string(fock_cutoff));
    out.flagged[c] = out.deficiency[c] > 1e-6;
    out.vectors.col(c) /= norm;
  }
  return out;
}

}  // namespace dsotto
