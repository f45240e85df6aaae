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

// Sequential state-preparation circuits with mid-circuit measurement and reset.
//
// Wire 0 is the system qubit, wires 1..n_b the bond register. Each iteration resets the
// system, applies the embedding unitary, and optionally measures the system.

#include "qmps/native.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace qmps {

enum class OpType { kGate, kMeasure, kReset, kLeakCheck };

inline const char* to_string(OpType t) {
  switch (t) {
    case OpType::kGate: return "gate";
    case OpType::kMeasure: return "measure";
    case OpType::kReset: return "reset";
    case OpType::kLeakCheck: return "leak_check";
  }
  return "?";
}

struct CircuitOp {
  OpType type = OpType::kGate;
  std::vector<int> wires;
  std::optional<NativeOp> native;  // native gate; wires mirror native->wires
  Matrix matrix;                   // generic gate on `wires` (first wire most significant)
  Axis basis = Axis::kZ;           // Measure
  std::string label;               // Measure, LeakCheck

  static CircuitOp gate(const NativeOp& op) {
    CircuitOp c;
    c.native = op;
    c.wires = op.is_uzz() ? std::vector<int>{op.wires[0], op.wires[1]} : std::vector<int>{op.wires[0]};
    return c;
  }
  static CircuitOp gate(Matrix u, std::vector<int> wires) {
    CircuitOp c;
    c.matrix = std::move(u);
    c.wires = std::move(wires);
    return c;
  }
  static CircuitOp measure(int wire, Axis basis, std::string label) {
    CircuitOp c;
    c.type = OpType::kMeasure;
    c.wires = {wire};
    c.basis = basis;
    c.label = std::move(label);
    return c;
  }
  static CircuitOp reset(int wire) {
    CircuitOp c;
    c.type = OpType::kReset;
    c.wires = {wire};
    return c;
  }
  static CircuitOp leak_check(std::vector<int> wires, std::string label) {
    CircuitOp c;
    c.type = OpType::kLeakCheck;
    c.wires = std::move(wires);
    c.label = std::move(label);
    return c;
  }

  bool is_native() const { return type == OpType::kGate && native.has_value(); }
  bool is_uzz() const { return is_native() && native->is_uzz(); }

  /// Gate unitary on `wires`.
  Matrix gate_matrix() const {
    if (type != OpType::kGate) throw Error("gate_matrix: not a gate");
    if (!native) return matrix;
    return native->is_uzz() ? uzz_matrix() : rotation(native->axis, native->angle);
  }
};

enum class Purpose { kEnergy, kTomography };

inline const char* to_string(Purpose p) { return p == Purpose::kEnergy ? "energy" : "tomography"; }

struct CircuitMetadata {
  double lambda = std::numeric_limits<double>::quiet_NaN();
  int chi = 2;
  int iterations = 0;
  Purpose purpose = Purpose::kEnergy;
  std::string setting;  // tomography bases, e.g. "XZ"
};

struct Circuit {
  int n_wires = 2;
  std::vector<CircuitOp> ops;
  CircuitMetadata metadata;

  int n_b() const { return n_wires - 1; }
  int uzz_count() const {
    return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](const CircuitOp& o) { return o.is_uzz(); }));
  }
  int count(OpType t) const {
    return static_cast<int>(std::count_if(ops.begin(), ops.end(), [t](const CircuitOp& o) { return o.type == t; }));
  }
  bool all_native() const {
    return std::all_of(ops.begin(), ops.end(), [](const CircuitOp& o) { return o.type != OpType::kGate || o.native; });
  }
  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& o : ops)
      if (o.type == OpType::kMeasure || o.type == OpType::kLeakCheck) out.push_back(o.label);
    return out;
  }

  void validate() const {
    if (n_wires < 1) throw Error("Circuit: needs at least one wire");
    std::vector<std::string> seen;
    bool system_dirty = false;  // measured and not yet reset
    for (const auto& o : ops) {
      if (o.wires.empty()) throw Error("Circuit: op without wires");
      for (int w : o.wires)
        if (w < 0 || w >= n_wires) throw Error("Circuit: wire out of range");
      if (o.type == OpType::kGate) {
        const Eigen::Index dim = Eigen::Index{1} << o.wires.size();
        const Matrix u = o.gate_matrix();
        if (u.rows() != dim || !is_unitary(u, 1e-10)) throw Error("Circuit: gate matrix is not a unitary on its wires");
        if (system_dirty && std::count(o.wires.begin(), o.wires.end(), 0))
          throw Error("Circuit: gate on the system wire after a measurement without reset");
      }
      if (o.type == OpType::kMeasure || o.type == OpType::kLeakCheck) {
        if (o.label.empty()) throw Error("Circuit: unlabeled record");
        if (std::find(seen.begin(), seen.end(), o.label) != seen.end()) throw Error("Circuit: duplicate label " + o.label);
        seen.push_back(o.label);
      }
      if (o.type == OpType::kMeasure && o.wires[0] == 0) system_dirty = true;
      if (o.type == OpType::kReset && o.wires[0] == 0) system_dirty = false;
    }
  }
};

/// Bases on the last iterations: X, Z, Z.
inline std::vector<Axis> default_energy_schedule() { return {Axis::kX, Axis::kZ, Axis::kZ}; }

/// Mid-circuit measurement label: basis letter followed by the 1-based iteration.
inline std::string measurement_label(Axis basis, int iteration) { return std::string(1, to_char(basis)) + std::to_string(iteration); }

/// Terminal bond-register measurement label.
inline std::string bond_label(int wire) { return "b" + std::to_string(wire); }

inline constexpr const char* kLeakLabel = "leak";

using TomographySetting = std::vector<Axis>;  // basis per bond qubit 1..n_b

inline std::string setting_name(const TomographySetting& s) {
  std::string out;
  for (Axis a : s) out += to_char(a);
  return out;
}

inline TomographySetting setting_from_name(const std::string& name) {
  TomographySetting s;
  for (char c : name) s.push_back(axis_from_char(c));
  return s;
}

/// Measurement settings for bond-register tomography. The restricted set covers the Pauli
/// terms {IX, XI, XX, YZ, ZY} of a real, Z2-symmetric state in the bond gauge of the ansatz.
inline std::vector<TomographySetting> tomography_settings(int n_b, bool restricted) {
  const Axis all[] = {Axis::kX, Axis::kY, Axis::kZ};
  if (n_b == 1) return {{Axis::kX}, {Axis::kY}, {Axis::kZ}};
  if (n_b != 2) throw Error("tomography_settings: n_b must be 1 or 2");
  if (restricted) return {{Axis::kX, Axis::kX}, {Axis::kY, Axis::kZ}, {Axis::kZ, Axis::kY}};
  std::vector<TomographySetting> out;
  for (Axis a : all)
    for (Axis b : all) out.push_back({a, b});
  return out;
}

namespace detail {

inline void append_fragment(std::vector<CircuitOp>& ops, const NativeCircuitFragment& f, int offset) {
  for (auto op : f.ops) {
    op.wires[0] += offset;
    op.wires[1] += offset;
    ops.push_back(CircuitOp::gate(op));
  }
}

}  // namespace detail

/// One iteration's embedding: either a dense unitary on all wires or a native fragment.
struct IterationBlock {
  int n_qubits = 2;
  std::optional<Matrix> unitary;
  std::optional<NativeCircuitFragment> fragment;

  IterationBlock(const UnitaryGate& u) : n_qubits(u.n_qubits), unitary(u.matrix) {}  // NOLINT
  IterationBlock(const NativeCircuitFragment& f) : n_qubits(f.n_qubits), fragment(f) {}  // NOLINT

  Matrix matrix() const { return unitary ? *unitary : fragment->matrix(); }
};

/// [prep on bond wires] + j x [Reset(system), U, optional Measure(system)] (+ terminal bond
/// measurements for tomography) (+ LeakCheck over all wires when requested).
///
/// For energy circuits `bases` is the schedule placed on the last iterations; for tomography
/// it is the per-bond-qubit measurement setting (default all Z).
inline Circuit build_state_prep_circuit(const IterationBlock& u, const BoundaryPrep& prep, int j, Purpose purpose,
                                        std::vector<Axis> bases = {}, bool leak_check = false) {
  if (j < 1) throw Error("build_state_prep_circuit: j must be >= 1");
  const int n_b = u.n_qubits - 1;
  if (n_b < 1) throw Error("build_state_prep_circuit: the embedding needs at least one bond qubit");
  if (prep.fragment.n_qubits != n_b || prep.w_unitary.n_qubits != n_b)
    throw Error("build_state_prep_circuit: boundary preparation does not match the bond register");

  Circuit c;
  c.n_wires = u.n_qubits;
  c.metadata.chi = 1 << n_b;
  c.metadata.iterations = j;
  c.metadata.purpose = purpose;

  if (purpose == Purpose::kEnergy) {
    if (bases.empty()) bases = default_energy_schedule();
    if (static_cast<int>(bases.size()) > j) throw Error("build_state_prep_circuit: schedule longer than j");
  } else {
    if (bases.empty()) bases.assign(n_b, Axis::kZ);
    if (static_cast<int>(bases.size()) != n_b) throw Error("build_state_prep_circuit: setting must name one basis per bond qubit");
    c.metadata.setting = setting_name(bases);
  }

  detail::append_fragment(c.ops, prep.fragment, 1);
  const int first_measured = j - static_cast<int>(bases.size()) + 1;
  for (int it = 1; it <= j; ++it) {
    c.ops.push_back(CircuitOp::reset(0));
    if (u.fragment) {
      detail::append_fragment(c.ops, *u.fragment, 0);
    } else {
      std::vector<int> wires(u.n_qubits);
      for (int w = 0; w < u.n_qubits; ++w) wires[w] = w;
      c.ops.push_back(CircuitOp::gate(*u.unitary, wires));
    }
    if (purpose == Purpose::kEnergy && it >= first_measured) {
      const Axis b = bases[it - first_measured];
      c.ops.push_back(CircuitOp::measure(0, b, measurement_label(b, it)));
    }
  }
  if (purpose == Purpose::kTomography)
    for (int w = 1; w <= n_b; ++w) c.ops.push_back(CircuitOp::measure(w, bases[w - 1], bond_label(w)));
  if (leak_check) {
    std::vector<int> all(c.n_wires);
    for (int w = 0; w < c.n_wires; ++w) all[w] = w;
    c.ops.push_back(CircuitOp::leak_check(all, kLeakLabel));
  }
  c.validate();
  return c;
}

/// One tomography circuit per setting.
inline std::vector<Circuit> build_tomography_circuits(const IterationBlock& u, const BoundaryPrep& prep, int j,
                                                      bool restricted, bool leak_check = false) {
  std::vector<Circuit> out;
  for (const auto& s : tomography_settings(u.n_qubits - 1, restricted))
    out.push_back(build_state_prep_circuit(u, prep, j, Purpose::kTomography, s, leak_check));
  return out;
}

/// Outcomes of one shot: label -> +1/-1 for measurements; leak checks are kept separately.
struct ShotRecord {
  std::map<std::string, int> outcomes;
  std::map<std::string, bool> leak_checks;
  bool leaked = false;
  std::uint64_t seed = 0;
};

}  // namespace qmps
