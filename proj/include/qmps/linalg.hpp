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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmps {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Base error for every contract violation raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome flag carried by results that may be degraded rather than failed.
enum class Status { kOk, kDegenerate, kWarning, kNotConverged };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::kOk: return "ok";
    case Status::kDegenerate: return "degenerate";
    case Status::kWarning: return "warning";
    case Status::kNotConverged: return "not_converged";
  }
  return "unknown";
}

namespace pauli {

inline Matrix I() { return Matrix::Identity(2, 2); }
inline Matrix X() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix Y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
inline Matrix Z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
/// Index 0..3 -> I, X, Y, Z.
inline Matrix by_index(int k) {
  switch (k) {
    case 0: return I();
    case 1: return X();
    case 2: return Y();
    case 3: return Z();
  }
  throw Error("pauli index out of range");
}

}  // namespace pauli

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix kron_all(std::span<const Matrix> factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline Matrix dagger(const Matrix& m) { return m.adjoint(); }

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm() <= tol;
}

inline bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol;
}

/// Hermitian matrix exponential exp(i * theta * h) via eigendecomposition.
inline Matrix expi_hermitian(const Matrix& h, double theta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  Vector phases = (kI * theta * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Distance between unitaries modulo a global phase: min_phi ||a - e^{i phi} b||_F.
inline double phase_distance(const Matrix& a, const Matrix& b) {
  Complex overlap = (b.adjoint() * a).trace();
  Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - phase * b).norm();
}

/// Trace distance 0.5 * ||a - b||_1 for Hermitian arguments.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline int log2_exact(Eigen::Index n) {
  int k = 0;
  while ((Eigen::Index{1} << k) < n) ++k;
  if ((Eigen::Index{1} << k) != n) throw Error("dimension " + std::to_string(n) + " is not a power of two");
  return k;
}

/// Embed an operator acting on `wires` (in the given order) into an n-qubit register.
/// Wire 0 is the most significant bit of the computational index.
inline Matrix embed_operator(const Matrix& op, std::span<const int> wires, int n_qubits) {
  const int k = static_cast<int>(wires.size());
  if (op.rows() != (Eigen::Index{1} << k)) throw Error("operator size does not match wire count");
  for (int w : wires)
    if (w < 0 || w >= n_qubits) throw Error("wire index out of range");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Matrix out = Matrix::Zero(dim, dim);
  auto sub_index = [&](Eigen::Index full) {
    Eigen::Index s = 0;
    for (int i = 0; i < k; ++i) s = (s << 1) | ((full >> (n_qubits - 1 - wires[i])) & 1);
    return s;
  };
  Eigen::Index mask = 0;
  for (int w : wires) mask |= Eigen::Index{1} << (n_qubits - 1 - w);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const Eigen::Index rest = col & ~mask;
    const Eigen::Index sc = sub_index(col);
    for (Eigen::Index sr = 0; sr < op.rows(); ++sr) {
      if (op(sr, sc) == Complex(0.0)) continue;
      Eigen::Index row = rest;
      for (int i = 0; i < k; ++i)
        if ((sr >> (k - 1 - i)) & 1) row |= Eigen::Index{1} << (n_qubits - 1 - wires[i]);
      out(row, col) += op(sr, sc);
    }
  }
  return out;
}

inline Matrix embed_operator(const Matrix& op, std::initializer_list<int> wires, int n_qubits) {
  std::vector<int> w(wires);
  return embed_operator(op, std::span<const int>(w), n_qubits);
}

/// Partial trace keeping the listed wires (in ascending order) of an n-qubit operator.
inline Matrix partial_trace_keep(const Matrix& rho, std::span<const int> keep, int n_qubits) {
  const int k = static_cast<int>(keep.size());
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (rho.rows() != dim) throw Error("partial trace dimension mismatch");
  Eigen::Index keep_mask = 0;
  for (int w : keep) keep_mask |= Eigen::Index{1} << (n_qubits - 1 - w);
  auto sub_index = [&](Eigen::Index full) {
    Eigen::Index s = 0;
    for (int i = 0; i < k; ++i) s = (s << 1) | ((full >> (n_qubits - 1 - keep[i])) & 1);
    return s;
  };
  Matrix out = Matrix::Zero(Eigen::Index{1} << k, Eigen::Index{1} << k);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      if ((r & ~keep_mask) == (c & ~keep_mask)) out(sub_index(r), sub_index(c)) += rho(r, c);
  return out;
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
template <class Rng>
Matrix random_unitary(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

/// Uniformly random pure state.
template <class Rng>
Vector random_state(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v.normalized();
}

/// Deterministic 64-bit mixer used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace qmps
