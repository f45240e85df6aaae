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

// Unitary embeddings of MPS tensors, the tiled two-qubit gate ansatz, and the variational
// energy optimizer for the transverse-field Ising chain.
//
// Register convention: wire 0 is the system qubit, wires 1..n_b the bond register, and wire 0
// is the most significant bit of every matrix index, so V_s^{ab} = U(s * chi + b, a).

#include "qmps/gates.hpp"
#include "qmps/mps_core.hpp"
#include "qmps/optimize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qmps {

struct UnitaryGate {
  int n_qubits = 0;
  Matrix matrix;

  UnitaryGate() = default;
  explicit UnitaryGate(Matrix m, double tol = 1e-10) : n_qubits(log2_exact(m.rows())), matrix(std::move(m)) {
    if (!is_unitary(matrix, tol)) throw Error("UnitaryGate: matrix is not unitary");
  }
};

inline MPSTensor extract_isometry(const UnitaryGate& u, int n_b) {
  if (n_b < 0 || u.n_qubits != n_b + 1) throw Error("extract_isometry: unitary does not act on 1 + n_b qubits");
  const int chi = 1 << n_b;
  std::array<Matrix, 2> v{Matrix(chi, chi), Matrix(chi, chi)};
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < chi; ++a)
      for (int b = 0; b < chi; ++b) v[s](a, b) = u.matrix(s * chi + b, a);
  return MPSTensor(v);
}

/// Unitary whose columns on |0>|a> hold the tensor; the remaining columns come from
/// Gram-Schmidt against the canonical basis in index order.
inline UnitaryGate complete_isometry(const MPSTensor& tensor) {
  if (!is_isometry(tensor, 1e-8)) throw Error("complete_isometry: tensor is not an isometry");
  const int chi = tensor.chi();
  const int dim = 2 * chi;
  Matrix u = Matrix::Zero(dim, dim);
  for (int a = 0; a < chi; ++a)
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < chi; ++b) u(s * chi + b, a) = tensor(s, a, b);
  // Re-orthonormalize the given columns so round-off does not accumulate in the completion.
  for (int a = 0; a < chi; ++a) {
    for (int pass = 0; pass < 2; ++pass)
      for (int p = 0; p < a; ++p) u.col(a) -= u.col(p).dot(u.col(a)) * u.col(p);
    u.col(a).normalize();
  }
  int filled = chi;
  for (int e = 0; e < dim && filled < dim; ++e) {
    Vector c = Vector::Unit(dim, e);
    for (int pass = 0; pass < 2; ++pass)
      for (int p = 0; p < filled; ++p) c -= u.col(p).dot(c) * u.col(p);
    if (c.norm() < 1e-6) continue;
    u.col(filled++) = c.normalized();
  }
  return UnitaryGate(u);
}

// ---------------------------------------------------------------------------
// Two-qubit template gates.

namespace detail {

// Local Clifford that carries exp(-i(a XZ + b ZY)/2) to exp(-i(a XY + b YX)/2).
inline Matrix gxy_frame() { return kron(rx(kPi / 2), rz(kPi / 2) * ry(kPi / 2)); }

}  // namespace detail

/// exp(-i(alpha XY + beta YX)/2) built as two cZ gates around R_x(alpha) x R_y(beta),
/// conjugated by a fixed local Clifford frame. Identity at alpha = beta = 0.
inline UnitaryGate gxy_gate(double alpha, double beta) {
  const Matrix c = detail::gxy_frame();
  return UnitaryGate(c * cz_matrix() * kron(rx(alpha), ry(beta)) * cz_matrix() * c.adjoint());
}

/// R_y(pi/2)^dagger G^{XY} R_y(pi/2) with the rotation on the first qubit.
inline UnitaryGate gzy_gate(double alpha, double beta) {
  const Matrix r = kron(ry(kPi / 2), pauli::I());
  return UnitaryGate(r.adjoint() * gxy_gate(alpha, beta).matrix * r);
}

// ---------------------------------------------------------------------------
// Layouts.

enum class TileKind { kGXY, kGZY, kRotation };

inline const char* to_string(TileKind k) {
  switch (k) {
    case TileKind::kGXY: return "GXY";
    case TileKind::kGZY: return "GZY";
    case TileKind::kRotation: return "R";
  }
  return "?";
}

struct Tile {
  TileKind kind = TileKind::kGXY;
  std::vector<int> wires;
  Axis axis = Axis::kY;                // rotation tiles only
  std::optional<double> fixed_angle;   // rotation tiles only; a fixed tile consumes no parameter

  int n_angles() const {
    if (kind == TileKind::kRotation) return fixed_angle ? 0 : 1;
    return 2;
  }
};

inline Tile gxy_tile(int a, int b) { return {TileKind::kGXY, {a, b}, Axis::kY, std::nullopt}; }
inline Tile gzy_tile(int a, int b) { return {TileKind::kGZY, {a, b}, Axis::kY, std::nullopt}; }
inline Tile rotation_tile(Axis axis, int wire) { return {TileKind::kRotation, {wire}, axis, std::nullopt}; }
inline Tile fixed_rotation_tile(Axis axis, int wire, double angle) { return {TileKind::kRotation, {wire}, axis, angle}; }

struct GateLayout {
  int n_b = 1;
  std::vector<Tile> tiles;  // applied in order (first tile acts first)

  int n_wires() const { return n_b + 1; }
  int n_angles() const {
    int n = 0;
    for (const auto& t : tiles) n += t.n_angles();
    return n;
  }
  void validate() const {
    if (n_b < 1) throw Error("GateLayout: n_b must be at least 1");
    for (const auto& t : tiles) {
      const std::size_t want = t.kind == TileKind::kRotation ? 1 : 2;
      if (t.wires.size() != want) throw Error("GateLayout: tile has the wrong number of wires");
      for (int w : t.wires)
        if (w < 0 || w > n_b) throw Error("GateLayout: wire index out of range");
      if (want == 2 && t.wires[0] == t.wires[1]) throw Error("GateLayout: two-qubit tile on a single wire");
    }
  }
};

/// Default layouts.
///
/// n_b = 1: R_y on the bond qubit, one G^{XY} tile between system and bond, R_y on the system.
/// The free system rotation lets the state break the Ising symmetry in the ordered phase.
///
/// n_b = 2: one G^{XY} tile on each wire pair. These keep the joint Z-parity of the register,
/// and the fixed R_y(pi/2) on the system turns that parity into the physical X-parity, so the
/// MPS is Z2 symmetric by construction. The fixed bond rotations are a gauge change G (x) G'
/// applied as (G^dag before, G after); they leave the MPS unchanged and rotate the real,
/// ZZ-symmetric bond state onto the Pauli set {II, IX, XI, XX, YZ, ZY}.
inline GateLayout default_layout(int n_b) {
  GateLayout l;
  l.n_b = n_b;
  if (n_b == 1) {
    l.tiles = {rotation_tile(Axis::kY, 1), gxy_tile(0, 1), rotation_tile(Axis::kY, 0)};
  } else if (n_b == 2) {
    l.tiles = {fixed_rotation_tile(Axis::kX, 1, -kPi / 2), fixed_rotation_tile(Axis::kY, 1, -kPi / 2),
               fixed_rotation_tile(Axis::kY, 2, -kPi / 2), gxy_tile(0, 1),
               gxy_tile(0, 2),                            gxy_tile(1, 2),
               fixed_rotation_tile(Axis::kY, 0, kPi / 2), fixed_rotation_tile(Axis::kY, 1, kPi / 2),
               fixed_rotation_tile(Axis::kX, 1, kPi / 2), fixed_rotation_tile(Axis::kY, 2, kPi / 2)};
  } else {
    throw Error("default_layout: only n_b = 1 and n_b = 2 are supported");
  }
  return l;
}

struct AnsatzParams {
  RealVector angles;
  GateLayout layout;

  void validate() const {
    layout.validate();
    if (angles.size() != layout.n_angles()) throw Error("AnsatzParams: angle count does not match the layout");
  }
};

inline Matrix tile_matrix(const Tile& t, const double* angles) {
  switch (t.kind) {
    case TileKind::kGXY: return gxy_gate(angles[0], angles[1]).matrix;
    case TileKind::kGZY: return gzy_gate(angles[0], angles[1]).matrix;
    case TileKind::kRotation: return rotation(t.axis, t.fixed_angle ? *t.fixed_angle : angles[0]);
  }
  throw Error("unknown tile kind");
}

inline UnitaryGate build_ansatz_unitary(const AnsatzParams& params) {
  params.validate();
  const int n = params.layout.n_wires();
  Matrix u = Matrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  const double* a = params.angles.data();
  for (const auto& t : params.layout.tiles) {
    u = embed_operator(tile_matrix(t, a), std::span<const int>(t.wires), n) * u;
    a += t.n_angles();
  }
  return UnitaryGate(u, 1e-12);
}

// ---------------------------------------------------------------------------
// Variational energy optimization.

struct TFIMEnergy {
  double energy = 0.0;
  double mean_x = 0.0;
  double mean_zz = 0.0;
};

/// Energy per site -(<ZZ> + lambda <X>) at the channel fixed point. A degenerate fixed point
/// is resolved from the symmetric boundary state.
inline TFIMEnergy tfim_energy(const MPSTensor& tensor, double lambda) {
  const BondChannel ch = bond_channel(tensor);
  const auto fast = unique_fixed_point(ch);
  const Matrix rho = fast ? *fast : transfer_spectrum(ch, BoundaryState::uniform(tensor.chi())).fixed_point;
  TFIMEnergy e;
  e.mean_x = local_at(ch, rho, pauli::X());
  e.mean_zz = nn_at(ch, rho, pauli::Z(), pauli::Z());
  e.energy = -(e.mean_zz + lambda * e.mean_x);
  return e;
}

enum class OptimizeMode { kAnsatz, kFullUnitary };

inline const char* to_string(OptimizeMode m) { return m == OptimizeMode::kAnsatz ? "ansatz" : "full_unitary"; }

inline OptimizeMode optimize_mode_from_string(const std::string& s) {
  if (s == "ansatz") return OptimizeMode::kAnsatz;
  if (s == "full_unitary") return OptimizeMode::kFullUnitary;
  throw Error("unknown optimization mode '" + s + "'");
}

/// Pauli string with two bits per qubit, first qubit in the most significant pair.
inline Matrix pauli_string(int code, int n_qubits) {
  Matrix m = Matrix::Identity(1, 1);
  for (int q = 0; q < n_qubits; ++q) m = kron(m, pauli::by_index((code >> (2 * (n_qubits - 1 - q))) & 3));
  return m;
}

/// exp(i sum_k theta_k P_k) over all non-identity Pauli strings; covers SU(2^n).
inline UnitaryGate full_unitary(const RealVector& theta, int n_qubits) {
  const int count = (1 << (2 * n_qubits)) - 1;
  if (theta.size() != count) throw Error("full_unitary: wrong parameter count");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Matrix h = Matrix::Zero(dim, dim);
  for (int c = 1; c <= count; ++c)
    if (theta(c - 1) != 0.0) h += theta(c - 1) * pauli_string(c, n_qubits);
  return UnitaryGate(expi_hermitian(h, 1.0));
}

struct OptimizerConfig {
  int restarts = 8;
  std::uint64_t seed = 2024;
  MinimizeOptions simplex{0.5, 1e-9, 1e-14, 3000};
  QuasiNewtonOptions quasi_newton{};
  std::optional<GateLayout> layout;      // ansatz mode; default_layout(n_b) when empty
  std::vector<RealVector> initial_points;  // tried before the random restarts
};

struct OptimizeResult {
  double lambda = 0.0;
  int n_b = 1;
  OptimizeMode mode = OptimizeMode::kAnsatz;
  AnsatzParams params;       // ansatz mode
  RealVector parameters;     // raw optimizer coordinates (angles, or Pauli generator weights)
  UnitaryGate unitary;
  MPSTensor tensor{{Matrix::Identity(1, 1), Matrix::Zero(1, 1)}};
  double energy = 0.0;
  int evaluations = 0;
  Status status = Status::kOk;
};

inline UnitaryGate unitary_from_parameters(OptimizeMode mode, const GateLayout& layout, const RealVector& x) {
  if (mode == OptimizeMode::kAnsatz) return build_ansatz_unitary({x, layout});
  return full_unitary(x, layout.n_b + 1);
}

/// Rebuilds an optimization result from stored coordinates (no search).
inline OptimizeResult result_from_parameters(double lambda, int n_b, OptimizeMode mode, const RealVector& x,
                                             const GateLayout& layout) {
  OptimizeResult out;
  out.lambda = lambda;
  out.n_b = n_b;
  out.mode = mode;
  out.parameters = x;
  if (mode == OptimizeMode::kAnsatz) out.params = {x, layout};
  out.unitary = unitary_from_parameters(mode, layout, x);
  out.tensor = extract_isometry(out.unitary, n_b);
  out.energy = tfim_energy(out.tensor, lambda).energy;
  return out;
}

/// Minimizes the fixed-point energy. Each restart runs Nelder-Mead, a finite-difference BFGS
/// polish and a coordinate-descent polish; the lowest energy wins, earliest restart on ties.
inline OptimizeResult variational_optimize(double lambda, int n_b, OptimizeMode mode, const OptimizerConfig& config = {}) {
  if (n_b != 1 && n_b != 2) throw Error("variational_optimize: n_b must be 1 or 2");
  if (!(lambda >= 0)) throw Error("variational_optimize: lambda must be nonnegative");
  const GateLayout layout = config.layout ? *config.layout : default_layout(n_b);
  if (layout.n_b != n_b) throw Error("variational_optimize: layout does not match n_b");
  const int n_params = mode == OptimizeMode::kAnsatz ? layout.n_angles() : (1 << (2 * (n_b + 1))) - 1;

  const Objective f = [&](const RealVector& x) {
    return tfim_energy(extract_isometry(unitary_from_parameters(mode, layout, x), n_b), lambda).energy;
  };

  std::vector<RealVector> starts;
  for (const auto& p : config.initial_points) {
    if (p.size() != n_params) throw Error("variational_optimize: initial point has the wrong size");
    starts.push_back(p);
  }
  for (int r = 0; r < config.restarts; ++r) {
    std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    const double range = mode == OptimizeMode::kAnsatz ? kPi : 1.0;
    std::uniform_real_distribution<double> u(-range, range);
    RealVector x(n_params);
    for (auto& xi : x) xi = u(rng);
    starts.push_back(x);
  }
  if (starts.empty()) throw Error("variational_optimize: no starting points");

  MinimizeResult best;
  best.value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool any_converged = false;
  for (const auto& x0 : starts) {
    MinimizeResult r = nelder_mead(f, x0, config.simplex);
    r = bfgs(f, r, config.quasi_newton);
    const bool qn_converged = r.converged;
    r = coordinate_polish(f, r);
    evaluations += r.evaluations;
    any_converged = any_converged || qn_converged;
    if (r.value < best.value) best = r;
  }

  OptimizeResult out = result_from_parameters(lambda, n_b, mode, best.x, layout);
  out.evaluations = evaluations;
  out.status = any_converged ? Status::kOk : Status::kWarning;
  return out;
}

}  // namespace qmps
