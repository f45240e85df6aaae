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

// Compilation of one- and two-qubit unitaries to the native gate set {R_x, R_y, R_z, U_zz},
// and boundary-state preparation circuits.

#include "qmps/ansatz.hpp"

#include <algorithm>

namespace qmps {

struct NativeOp {
  enum class Kind { kRotation, kUzz };
  Kind kind = Kind::kRotation;
  Axis axis = Axis::kZ;
  double angle = 0.0;
  std::array<int, 2> wires{0, 0};  // rotation uses wires[0]

  static NativeOp rot(Axis a, double theta, int wire) { return {Kind::kRotation, a, theta, {wire, wire}}; }
  static NativeOp uzz(int a, int b) { return {Kind::kUzz, Axis::kZ, 0.0, {a, b}}; }
  bool is_uzz() const { return kind == Kind::kUzz; }
};

/// Ordered native operations (first element acts first) on local wires 0..n_qubits-1.
struct NativeCircuitFragment {
  int n_qubits = 1;
  std::vector<NativeOp> ops;

  int uzz_count() const {
    return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](const NativeOp& o) { return o.is_uzz(); }));
  }
  Matrix matrix() const {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    Matrix u = Matrix::Identity(dim, dim);
    for (const auto& op : ops) {
      if (op.is_uzz())
        u = embed_operator(uzz_matrix(), {op.wires[0], op.wires[1]}, n_qubits) * u;
      else
        u = embed_operator(rotation(op.axis, op.angle), {op.wires[0]}, n_qubits) * u;
    }
    return u;
  }
};

struct ZyzAngles {
  double phase = 0.0;
  double a = 0.0, b = 0.0, c = 0.0;  // u = e^{i phase} R_z(a) R_y(b) R_z(c)
};

inline ZyzAngles zyz_decompose(const Matrix& u) {
  if (u.rows() != 2 || u.cols() != 2) throw Error("zyz_decompose: expected a 2x2 matrix");
  const Complex det = u.determinant();
  ZyzAngles z;
  z.phase = std::arg(det) / 2;
  const Matrix v = u * std::exp(-kI * z.phase);  // SU(2)
  z.b = 2 * std::atan2(std::abs(v(1, 0)), std::abs(v(0, 0)));
  const double sum = std::abs(v(1, 1)) > 1e-14 ? 2 * std::arg(v(1, 1)) : 0.0;   // a + c
  const double diff = std::abs(v(1, 0)) > 1e-14 ? 2 * std::arg(v(1, 0)) : 0.0;  // a - c
  z.a = 0.5 * (sum + diff);
  z.c = 0.5 * (sum - diff);
  // v and -v share the same angles up to a 2 pi shift of (a + c); fix the sign by comparison.
  const Matrix r = rz(z.a) * ry(z.b) * rz(z.c);
  if ((r - v).norm() > (r + v).norm()) z.phase += kPi;
  return z;
}

namespace detail {

inline double wrap_angle(double t) {
  t = std::remainder(t, 4 * kPi);  // rotations have period 4 pi; 2 pi differs by a global sign only
  return t;
}

inline bool negligible_rotation(double t) { return std::abs(std::remainder(t, 2 * kPi)) < 1e-12; }

inline void append_single(std::vector<NativeOp>& ops, const Matrix& u, int wire) {
  const ZyzAngles z = zyz_decompose(u);
  if (!negligible_rotation(z.c)) ops.push_back(NativeOp::rot(Axis::kZ, wrap_angle(z.c), wire));
  if (!negligible_rotation(z.b)) ops.push_back(NativeOp::rot(Axis::kY, wrap_angle(z.b), wire));
  if (!negligible_rotation(z.a)) ops.push_back(NativeOp::rot(Axis::kZ, wrap_angle(z.a), wire));
}

/// Two-qubit gate list with single-qubit matrices merged between entangling gates.
class TwoQubitBuilder {
 public:
  void local(const Matrix& u0, const Matrix& u1) {
    pending_[0] = u0 * pending_[0];
    pending_[1] = u1 * pending_[1];
  }
  void uzz() {
    flush();
    ops_.push_back(NativeOp::uzz(0, 1));
  }
  NativeCircuitFragment finish() {
    flush();
    return {2, ops_};
  }

 private:
  void flush() {
    append_single(ops_, pending_[0], 0);
    append_single(ops_, pending_[1], 1);
    pending_ = {pauli::I(), pauli::I()};
  }
  std::array<Matrix, 2> pending_{pauli::I(), pauli::I()};
  std::vector<NativeOp> ops_;
};

inline Matrix magic_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = s;
  m(3, 0) = s;
  m(0, 1) = kI * s;
  m(3, 1) = -kI * s;
  m(1, 2) = kI * s;
  m(2, 2) = kI * s;
  m(1, 3) = s;
  m(2, 3) = -s;
  return m;
}

/// Factor a 4x4 product operator a (x) b (nearest product in Frobenius norm), each factor in SU(2)
/// up to a phase absorbed into the second.
inline std::pair<Matrix, Matrix> factor_product(const Matrix& u) {
  Matrix r(4, 4);  // realignment: r(i1 j1, i2 j2) = u(i1 i2, j1 j2)
  for (int i1 = 0; i1 < 2; ++i1)
    for (int j1 = 0; j1 < 2; ++j1)
      for (int i2 = 0; i2 < 2; ++i2)
        for (int j2 = 0; j2 < 2; ++j2) r(i1 * 2 + j1, i2 * 2 + j2) = u(i1 * 2 + i2, j1 * 2 + j2);
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = svd.singularValues()(0);
  Matrix a(2, 2), b(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      a(i, j) = svd.matrixU()(i * 2 + j, 0) * std::sqrt(s);
      b(i, j) = std::conj(svd.matrixV()(i * 2 + j, 0)) * std::sqrt(s);
    }
  const Complex da = a.determinant();
  const Complex fix = std::sqrt(da);
  a /= fix;
  b *= fix;
  return {a, b};
}

inline Matrix canonical_gate(double c1, double c2, double c3) {
  const Matrix h = c1 * kron(pauli::X(), pauli::X()) + c2 * kron(pauli::Y(), pauli::Y()) + c3 * kron(pauli::Z(), pauli::Z());
  return expi_hermitian(h, 1.0);
}

}  // namespace detail

/// u = phase (a0 (x) a1) exp(i(c1 XX + c2 YY + c3 ZZ)) (b0 (x) b1).
struct KakDecomposition {
  Complex phase{1.0};
  Matrix a0, a1, b0, b1;
  std::array<double, 3> c{0, 0, 0};
};

inline KakDecomposition kak_decompose(const Matrix& u_in) {
  if (u_in.rows() != 4 || !is_unitary(u_in, 1e-8)) throw Error("kak_decompose: expected a 4x4 unitary");
  const Complex det = u_in.determinant();
  const Complex norm = std::pow(det, 0.25);
  const Matrix u = u_in / norm;
  const Matrix m = detail::magic_basis();
  const Matrix up = m.adjoint() * u * m;
  const Matrix mt = up.transpose() * up;

  // Real and imaginary parts of the symmetric unitary mt commute; a generic real combination
  // has their common eigenbasis.
  RealMatrix o;
  bool ok = false;
  for (int attempt = 0; attempt < 16 && !ok; ++attempt) {
    const double t = 0.4 + 0.7 * attempt;
    const RealMatrix comb = std::cos(t) * mt.real() + std::sin(t) * mt.imag();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (comb + comb.transpose()));
    o = es.eigenvectors();
    const Matrix d = o.transpose().cast<Complex>() * mt * o.cast<Complex>();
    ok = (d - Matrix(d.diagonal().asDiagonal())).norm() < 1e-9;
  }
  if (!ok) throw Error("kak_decompose: failed to diagonalize");
  if (o.determinant() < 0) o.col(0) *= -1.0;
  const Matrix oc = o.cast<Complex>();
  const Vector d = (oc.transpose() * mt * oc).diagonal();
  RealVector theta(4);
  for (int k = 0; k < 4; ++k) theta(k) = std::arg(d(k)) / 2;
  if (std::abs(std::remainder(theta.sum(), 2 * kPi)) > 1e-6) theta(0) += kPi;
  Vector ph(4);
  for (int k = 0; k < 4; ++k) ph(k) = std::exp(kI * theta(k));
  const Matrix k1 = up * oc * ph.conjugate().asDiagonal();
  const Matrix k2 = oc.transpose();

  // theta_k = phi + sum_j c_j lambda_jk, with lambda_jk the eigenvalue of the j-th Pauli pair on
  // the k-th magic basis vector.
  RealMatrix sys(4, 4);
  const std::array<Matrix, 3> pairs{kron(pauli::X(), pauli::X()), kron(pauli::Y(), pauli::Y()),
                                    kron(pauli::Z(), pauli::Z())};
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 3; ++j) sys(k, j) = (m.col(k).adjoint() * pairs[j] * m.col(k))(0, 0).real();
    sys(k, 3) = 1.0;
  }
  const RealVector sol = sys.fullPivLu().solve(theta);

  KakDecomposition out;
  out.c = {sol(0), sol(1), sol(2)};
  std::tie(out.a0, out.a1) = detail::factor_product(m * k1 * m.adjoint());
  std::tie(out.b0, out.b1) = detail::factor_product(m * k2 * m.adjoint());
  const Matrix rebuilt = kron(out.a0, out.a1) * detail::canonical_gate(out.c[0], out.c[1], out.c[2]) * kron(out.b0, out.b1);
  const Complex overlap = (rebuilt.adjoint() * u_in).trace() / 4.0;
  out.phase = overlap / std::abs(overlap);
  return out;
}

/// Minimal number of U_zz gates for a two-qubit unitary: 0, 1, 2 or 3.
inline int uzz_count_required(const KakDecomposition& k, double tol = 1e-9) {
  std::array<double, 3> c{};
  for (int j = 0; j < 3; ++j) c[j] = std::remainder(k.c[j], kPi / 2);
  int zeros = 0, quarters = 0;
  for (double x : c) {
    if (std::abs(x) < tol) ++zeros;
    if (std::abs(std::abs(x) - kPi / 4) < tol) ++quarters;
  }
  if (zeros == 3) return 0;
  if (zeros == 2 && quarters == 1) return 1;
  if (zeros >= 1) return 2;
  return 3;
}

namespace detail {

// Cyclic local Clifford with X -> Y -> Z -> X.
inline Matrix cyclic_clifford() { return rz(kPi / 2) * rx(kPi / 2); }

}  // namespace detail

inline NativeCircuitFragment decompose_to_native(const UnitaryGate& u) {
  if (u.n_qubits == 1) {
    NativeCircuitFragment f;
    f.n_qubits = 1;
    detail::append_single(f.ops, u.matrix, 0);
    return f;
  }
  if (u.n_qubits != 2) throw Error("decompose_to_native: only one- and two-qubit unitaries are supported");
  if (phase_distance(u.matrix, uzz_matrix()) < 1e-12) return {2, {NativeOp::uzz(0, 1)}};

  const KakDecomposition k = kak_decompose(u.matrix);
  // Reduce each coordinate into (-pi/4, pi/4]; exp(i pi/2 PP) = i PP is local.
  std::array<double, 3> c = k.c;
  const std::array<Matrix, 3> paulis{pauli::X(), pauli::Y(), pauli::Z()};
  Matrix left0 = k.a0, left1 = k.a1;
  for (int j = 0; j < 3; ++j) {
    double n = std::round(c[j] / (kPi / 2));
    if (c[j] - n * kPi / 2 <= -kPi / 4 + 1e-12) n -= 1;
    c[j] -= n * kPi / 2;
    const int times = ((static_cast<int>(n) % 2) + 2) % 2;
    if (times) {
      left0 = left0 * paulis[j];
      left1 = left1 * paulis[j];
    }
  }
  const int count = uzz_count_required(k);

  detail::TwoQubitBuilder b;
  b.local(k.b0, k.b1);
  // Rotate the coordinates so a zero (or the single nonzero quarter turn) sits where the
  // templates expect it: canon(c1, c2, c3) = (Q x Q) canon(c2, c3, c1) (Q x Q)^dag.
  const Matrix q = detail::cyclic_clifford();
  int shifts = 0;
  auto is_zero = [](double x) { return std::abs(x) < 1e-9; };
  if (count == 1) {
    while (is_zero(c[2])) {
      c = {c[1], c[2], c[0]};
      ++shifts;
    }
  } else if (count == 2) {
    while (!is_zero(c[2])) {
      c = {c[1], c[2], c[0]};
      ++shifts;
    }
  }
  Matrix qs = pauli::I();
  for (int s = 0; s < shifts; ++s) qs = q * qs;
  b.local(qs.adjoint(), qs.adjoint());

  if (count == 1) {
    // exp(i pi/4 ZZ) = U_zz.
    b.uzz();
  } else if (count == 2) {
    // exp(i(a XX + b YY)) = E U_zz (R_x(2a) x R_x(2b)) U_zz (Z x Z) E^dag, up to phase.
    const Matrix e0 = ry(-kPi / 2) * rx(-kPi / 2), e1 = ry(kPi / 2);
    b.local(e0.adjoint(), e1.adjoint());
    b.local(pauli::Z(), pauli::Z());
    b.uzz();
    b.local(rx(2 * c[0]), rx(2 * c[1]));
    b.uzz();
    b.local(e0, e1);
  } else if (count == 3) {
    // Three-CNOT canonical circuit, each CNOT written as (I x H) CZ (I x H) with
    // CZ = (R_z(pi/2) x R_z(pi/2)) U_zz up to phase.
    const Matrix h = (pauli::X() + pauli::Z()) / std::sqrt(2.0);
    auto cnot12 = [&] {
      b.local(pauli::I(), h);
      b.local(rz(kPi / 2), rz(kPi / 2));
      b.uzz();
      b.local(pauli::I(), h);
    };
    auto cnot21 = [&] {
      b.local(h, pauli::I());
      b.local(rz(kPi / 2), rz(kPi / 2));
      b.uzz();
      b.local(h, pauli::I());
    };
    b.local(pauli::I(), rz(-kPi / 2));
    cnot21();
    b.local(rz(kPi / 2 - 2 * c[2]), ry(-kPi / 2 + 2 * c[0]));
    cnot12();
    b.local(pauli::I(), ry(kPi / 2 - 2 * c[1]));
    cnot21();
    b.local(rz(kPi / 2), pauli::I());
  } else {
    b.local(pauli::I(), pauli::I());
  }
  b.local(qs, qs);
  b.local(left0, left1);
  NativeCircuitFragment f = b.finish();
  if (phase_distance(f.matrix(), u.matrix) > 1e-8)
    throw Error("decompose_to_native: reconstruction failed (error " + std::to_string(phase_distance(f.matrix(), u.matrix)) + ")");
  return f;
}

// ---------------------------------------------------------------------------
// Bond-register state preparation.

struct BoundaryPrep {
  UnitaryGate w_unitary;          // on the bond register, bond qubit 1 most significant
  BoundaryState target_state;
  NativeCircuitFragment fragment;  // local wires 0..n_b-1 correspond to bond wires 1..n_b
};

/// Deterministic W with W|0...0> = target. chi = 2: e^{i phi} R_z R_y. chi = 4: Schmidt
/// form, R_y on the first qubit, CNOT, then the Schmidt bases on each qubit.
inline BoundaryPrep boundary_prep(const BoundaryState& target) {
  const int chi = target.chi();
  const Vector& v = target.vector;
  BoundaryPrep out;
  out.target_state = target;
  if (chi == 2) {
    const double theta = 2 * std::atan2(std::abs(v(1)), std::abs(v(0)));
    const double alpha = std::abs(v(0)) > 1e-15 ? std::arg(v(0)) : 0.0;
    const double beta = std::abs(v(1)) > 1e-15 ? std::arg(v(1)) : alpha;
    out.w_unitary = UnitaryGate(std::exp(kI * (0.5 * (alpha + beta))) * rz(beta - alpha) * ry(theta));
  } else if (chi == 4) {
    Matrix psi(2, 2);
    psi << v(0), v(1), v(2), v(3);
    Eigen::JacobiSVD<Matrix> svd(psi, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector s = svd.singularValues();
    const double theta = 2 * std::atan2(s(1), s(0));
    const Matrix u = svd.matrixU();
    const Matrix w = svd.matrixV().conjugate();  // psi = U diag(s) W^T
    out.w_unitary = UnitaryGate(kron(u, w) * cnot_matrix() * kron(ry(theta), pauli::I()));
  } else {
    throw Error("boundary_prep: only chi = 2 and chi = 4 are supported");
  }
  out.fragment = decompose_to_native(out.w_unitary);
  const Vector prepared = out.w_unitary.matrix.col(0);
  if ((prepared - v).norm() > 1e-10) throw Error("boundary_prep: construction does not reach the target");
  return out;
}

// ---------------------------------------------------------------------------
// Compilation of a full embedding unitary (system + bond register).

/// Each tile compiled separately and placed on its wires; rotation tiles map to one native
/// rotation each.
inline NativeCircuitFragment compile_ansatz(const AnsatzParams& params) {
  params.validate();
  NativeCircuitFragment f;
  f.n_qubits = params.layout.n_wires();
  const double* a = params.angles.data();
  for (const auto& t : params.layout.tiles) {
    if (t.kind == TileKind::kRotation) {
      const double angle = t.fixed_angle ? *t.fixed_angle : a[0];
      if (!detail::negligible_rotation(angle)) f.ops.push_back(NativeOp::rot(t.axis, angle, t.wires[0]));
    } else {
      const auto sub = decompose_to_native(UnitaryGate(tile_matrix(t, a)));
      for (auto op : sub.ops) {
        op.wires = {t.wires[op.wires[0]], t.wires[op.wires[1]]};
        f.ops.push_back(op);
      }
    }
    a += t.n_angles();
  }
  return f;
}

/// Two-qubit (n_b = 1) embeddings can also be compiled directly from the matrix.
inline NativeCircuitFragment compile_unitary(const UnitaryGate& u) {
  if (u.n_qubits > 2) throw Error("compile_unitary: use compile_ansatz for embeddings wider than two qubits");
  return decompose_to_native(u);
}

}  // namespace qmps
