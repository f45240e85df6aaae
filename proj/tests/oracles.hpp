// Copyright 2026 The qmps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Independent reference computations for the test suite. Nothing here calls into the
// library's solvers; only basic types are shared.

#include "qmps/linalg.hpp"

#include <cmath>
#include <vector>

namespace qmps::oracle {

/// Half-chain entanglement entropy (bits) of the infinite TFIM ground state from the
/// corner-transfer-matrix single-particle spectrum. lambda < 1 returns the symmetric (cat)
/// branch, which carries one extra bit from the zero mode.
inline double ctm_entropy(double lambda) {
  const bool ordered = lambda < 1.0;
  const double k = ordered ? lambda : 1.0 / lambda;
  const double eps = M_PI * std::comp_ellint_1(std::sqrt(1.0 - k * k)) / std::comp_ellint_1(k);
  double s = ordered ? 1.0 : 0.0;
  for (int l = ordered ? 1 : 0; l < 4000; ++l) {
    const double e = ordered ? 2.0 * l * eps : (2.0 * l + 1.0) * eps;
    if (e > 700) break;
    const double p = 1.0 / (1.0 + std::exp(e));
    if (p <= 0) break;
    s -= p * std::log2(p) + (1 - p) * std::log2(1 - p);
  }
  return s;
}

/// Dense TFIM Hamiltonian H = -sum Z Z - lambda sum X on n sites.
inline RealMatrix tfim_dense(int n, double lambda, bool periodic) {
  const long dim = 1L << n;
  RealMatrix h = RealMatrix::Zero(dim, dim);
  const int bonds = periodic ? n : n - 1;
  for (long s = 0; s < dim; ++s) {
    for (int b = 0; b < bonds; ++b) {
      const int i = b, j = (b + 1) % n;
      const int zi = (s >> (n - 1 - i) & 1) ? -1 : 1;
      const int zj = (s >> (n - 1 - j) & 1) ? -1 : 1;
      h(s, s) -= zi * zj;
    }
    for (int i = 0; i < n; ++i) h(s ^ (1L << (n - 1 - i)), s) -= lambda;
  }
  return h;
}

/// Ground-state energy per site of the periodic chain by dense diagonalization.
inline double dense_ground_energy_per_site(int n, double lambda) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(tfim_dense(n, lambda, true), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) / n;
}

/// Sequentially generated state on `sites` physical qubits followed by the bond register:
/// each step applies the (1 + n_b)-qubit unitary to a fresh |0> and the current bond register.
/// Qubit order in the returned vector: site 1, ..., site `sites`, bond qubits.
inline Vector sequential_state(const Matrix& u, int n_b, const Vector& boundary, int sites) {
  const long chi = 1L << n_b;
  Vector psi = boundary;  // bond register only
  long phys_dim = 1;
  for (int s = 0; s < sites; ++s) {
    // Current layout: [earlier sites (phys_dim)] x [bond (chi)]. New site inserted before bond.
    Vector next = Vector::Zero(phys_dim * 2 * chi);
    for (long p = 0; p < phys_dim; ++p)
      for (long b = 0; b < chi; ++b) {
        const Complex amp = psi(p * chi + b);
        if (amp == Complex(0)) continue;
        for (long out = 0; out < 2 * chi; ++out) next(p * 2 * chi + out) += u(out, b) * amp;  // input row: sigma=0
      }
    psi = next;
    phys_dim *= 2;
  }
  return psi;
}

/// <psi| O_site |psi> for a single-site operator on physical site `site` (1-based).
inline double site_expectation(const Vector& psi, int sites, int n_b, int site, const Matrix& op) {
  const int n = sites + n_b;
  std::vector<int> wires{site - 1};
  Matrix full = Matrix::Identity(1, 1);
  for (int q = 0; q < n; ++q) full = kron(full, q == site - 1 ? op : Matrix(pauli::I()));
  return (psi.adjoint() * full * psi)(0, 0).real();
}

inline double two_site_expectation(const Vector& psi, int sites, int n_b, int site, const Matrix& a, const Matrix& b) {
  const int n = sites + n_b;
  Matrix full = Matrix::Identity(1, 1);
  for (int q = 0; q < n; ++q) full = kron(full, q == site - 1 ? a : q == site ? b : Matrix(pauli::I()));
  return (psi.adjoint() * full * psi)(0, 0).real();
}

/// Reduced density matrix of the bond register (the last n_b qubits).
inline Matrix bond_reduced(const Vector& psi, int n_b) {
  const long chi = 1L << n_b;
  const long rest = psi.size() / chi;
  const Eigen::Map<const Matrix> m(psi.data(), chi, rest);  // column-major: m(b, p) = psi(p * chi + b)
  return m * m.adjoint();
}

/// Depolarizing by explicit partial trace: (1 - p) rho + p Tr_w(rho) (x) I/2 for one wire.
inline Matrix depolarize_by_partial_trace(const Matrix& rho, int wire, int n, double p) {
  const long dim = 1L << n;
  const long bit = 1L << (n - 1 - wire);
  Matrix out = (1 - p) * rho;
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) {
      if ((i & bit) != (j & bit)) continue;
      const long i0 = i & ~bit, j0 = j & ~bit;
      out(i, j) += p * 0.5 * (rho(i0, j0) + rho(i0 | bit, j0 | bit));
    }
  return out;
}

/// Clip negative eigenvalues and renormalize, the naive PSD repair.
inline Matrix clip_renormalize(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  RealVector l = es.eigenvalues().cwiseMax(0.0);
  l /= l.sum();
  return es.eigenvectors() * l.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

inline double entropy_bits(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0;
  for (double p : es.eigenvalues())
    if (p > 1e-15) s -= p * std::log2(p);
  return s;
}

}  // namespace qmps::oracle
