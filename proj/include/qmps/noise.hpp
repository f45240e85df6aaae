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

// Stochastic noise model, gate folding for zero-noise extrapolation, and leakage
// post-selection.

#include "qmps/circuit.hpp"

namespace qmps {

/// Error rates. Depolarizing noise follows every physical gate: p2 on both wires of a U_zz,
/// p1 on the wire of an X or Y rotation (Z rotations are frame updates and noiseless).
/// Each U_zz leaks each of its qubits with probability p_leak. Every system measurement
/// (reset) depolarizes each bond qubit with eps_meas (eps_reset).
struct NoiseModel {
  double p2 = 0.0;
  double p1 = 0.0;
  double p_leak = 0.0;
  double eps_meas = 0.0;
  double eps_reset = 0.0;

  static NoiseModel none() { return {}; }
  static NoiseModel default_profile() { return {0.008, 0.0003, 0.001, 0.002, 0.0004}; }

  bool any() const { return p2 > 0 || p1 > 0 || p_leak > 0 || eps_meas > 0 || eps_reset > 0; }

  void validate() const {
    for (double p : {p2, p1, p_leak, eps_meas, eps_reset})
      if (!(p >= 0.0 && p <= 1.0)) throw Error("NoiseModel: probabilities must lie in [0, 1]");
  }
};

/// rho -> (1 - p) rho + p Tr_wires(rho) (x) I/d on `wires` of an n-qubit register.
inline Matrix depolarize(const Matrix& rho, std::span<const int> wires, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("depolarize: p must lie in [0, 1]");
  if (p == 0.0 || wires.empty()) return rho;
  const int n = log2_exact(rho.rows());
  const int k = static_cast<int>(wires.size());
  // Uniform Pauli twirl over the k wires is the completely depolarizing channel.
  Matrix twirl = Matrix::Zero(rho.rows(), rho.cols());
  const int n_paulis = 1 << (2 * k);
  for (int code = 0; code < n_paulis; ++code) {
    std::vector<Matrix> factors;
    int c = code;
    for (int i = 0; i < k; ++i, c >>= 2) factors.push_back(pauli::by_index(c & 3));
    const Matrix p_full = embed_operator(kron_all(factors), wires, n);
    twirl += p_full * rho * p_full.adjoint();
  }
  return (1.0 - p) * rho + (p / n_paulis) * twirl;
}

inline Matrix depolarize(const Matrix& rho, std::initializer_list<int> wires, double p) {
  const std::vector<int> w(wires);
  return depolarize(rho, std::span<const int>(w), p);
}

/// Each U_zz becomes [Z (x) Z, U_zz, U_zz, U_zz]; the Z (x) Z pair is two R_z(pi) frame
/// updates. The folded circuit implements the same unitary up to global phase.
inline Circuit fold_circuit(const Circuit& circuit) {
  if (!circuit.all_native()) throw Error("fold_circuit: circuit contains non-native gates");
  Circuit out = circuit;
  out.ops.clear();
  for (const auto& op : circuit.ops) {
    if (!op.is_uzz()) {
      out.ops.push_back(op);
      continue;
    }
    const auto& w = op.native->wires;
    out.ops.push_back(CircuitOp::gate(NativeOp::rot(Axis::kZ, kPi, w[0])));
    out.ops.push_back(CircuitOp::gate(NativeOp::rot(Axis::kZ, kPi, w[1])));
    for (int r = 0; r < 3; ++r) out.ops.push_back(op);
  }
  return out;
}

/// Matched estimates from the original (noise scale 1) and folded (scale 3) circuits.
struct ZNEPair {
  std::map<std::string, double> base_estimates;
  std::map<std::string, double> folded_estimates;
};

inline double zne_extrapolate(double e1, double e3) { return e1 - 0.5 * (e3 - e1); }

/// Linear extrapolation to zero noise: E0 = E1 - (E3 - E1) / 2 for every key.
inline std::map<std::string, double> zne_extrapolate(const ZNEPair& pair) {
  if (pair.base_estimates.size() != pair.folded_estimates.size())
    throw Error("zne_extrapolate: base and folded estimates have different labels");
  std::map<std::string, double> out;
  for (const auto& [k, e1] : pair.base_estimates) {
    const auto it = pair.folded_estimates.find(k);
    if (it == pair.folded_estimates.end()) throw Error("zne_extrapolate: label " + k + " missing from folded estimates");
    out[k] = zne_extrapolate(e1, it->second);
  }
  return out;
}

struct PostselectResult {
  std::vector<ShotRecord> shots;
  double retention = 0.0;
};

/// Drops shots whose leak check `check_label` fired.
inline PostselectResult leakage_postselect(const std::vector<ShotRecord>& shots, const std::string& check_label = kLeakLabel) {
  PostselectResult out;
  for (const auto& s : shots) {
    const auto it = s.leak_checks.find(check_label);
    if (it == s.leak_checks.end()) throw Error("leakage_postselect: shot has no leak check labeled " + check_label);
    if (!it->second) out.shots.push_back(s);
  }
  out.retention = shots.empty() ? 0.0 : double(out.shots.size()) / double(shots.size());
  return out;
}

}  // namespace qmps
