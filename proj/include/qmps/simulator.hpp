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

// Exact (density-matrix) and trajectory simulation of MCMR circuits with noise and leakage.
//
// Leakage is a classical per-wire flag. A leaked wire sits in |1> as a placeholder: single-qubit
// gates skip it, a two-qubit gate fully depolarizes its partner, measurements on it read -1,
// and only Reset brings it back.

#include "qmps/noise.hpp"

#include <cstdlib>
#include <thread>

namespace qmps {

/// Worker threads for shot sampling and sweeps: QMPS_WORKERS if set, else the hardware count.
inline int worker_count() {
  if (const char* env = std::getenv("QMPS_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

/// Full-register operators reused by both simulators.
struct RegisterOps {
  int n = 0;
  Eigen::Index dim = 0;
  std::vector<std::array<Matrix, 4>> pauli;        // [wire][I, X, Y, Z]
  std::vector<std::array<Matrix, 2>> reset_kraus;  // |0><0|, |0><1|
  std::vector<std::array<Matrix, 2>> leak_kraus;   // |1><0|, |1><1|

  explicit RegisterOps(int n_qubits) : n(n_qubits), dim(Eigen::Index{1} << n_qubits) {
    Matrix k00 = Matrix::Zero(2, 2), k01 = Matrix::Zero(2, 2), k10 = Matrix::Zero(2, 2), k11 = Matrix::Zero(2, 2);
    k00(0, 0) = 1;
    k01(0, 1) = 1;
    k10(1, 0) = 1;
    k11(1, 1) = 1;
    for (int w = 0; w < n; ++w) {
      std::array<Matrix, 4> p;
      for (int k = 0; k < 4; ++k) p[k] = embed_operator(pauli::by_index(k), {w}, n);
      pauli.push_back(p);
      reset_kraus.push_back({embed_operator(k00, {w}, n), embed_operator(k01, {w}, n)});
      leak_kraus.push_back({embed_operator(k10, {w}, n), embed_operator(k11, {w}, n)});
    }
  }

  Matrix projector(int wire, Axis basis, int sign) const {
    const int k = basis == Axis::kX ? 1 : basis == Axis::kY ? 2 : 3;
    return 0.5 * (Matrix::Identity(dim, dim) + double(sign) * pauli[wire][k]);
  }
};

/// Completely depolarizes one wire: Tr_w(rho) (x) I/2.
inline Matrix trace_replace(const Matrix& rho, int wire, int n) {
  const Eigen::Index bit = Eigen::Index{1} << (n - 1 - wire);
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    if (i & bit) continue;
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      if (j & bit) continue;
      const Complex avg = 0.5 * (rho(i, j) + rho(i | bit, j | bit));
      out(i, j) = avg;
      out(i | bit, j | bit) = avg;
    }
  }
  return out;
}

enum class GateNoise { kNone, kSingle, kUzz };

struct CompiledOp {
  OpType type = OpType::kGate;
  std::vector<int> wires;
  Matrix full;  // gate unitary on the whole register
  GateNoise noise = GateNoise::kNone;
  Axis basis = Axis::kZ;
  std::array<Matrix, 2> proj;  // +1 / -1 projectors for Measure
  int label = -1;              // index into the label list
};

struct CompiledCircuit {
  int n = 0;
  std::vector<CompiledOp> ops;
  std::vector<std::string> measure_labels;
  std::vector<std::string> check_labels;
  std::vector<std::pair<int, int>> pairs;  // consecutive measurement labels
};

inline CompiledCircuit compile_circuit(const Circuit& c, const NoiseModel& noise, const RegisterOps& reg, bool fuse) {
  c.validate();
  noise.validate();
  if (noise.any() && !c.all_native()) throw Error("simulate: noisy simulation requires native gates");
  CompiledCircuit out;
  out.n = c.n_wires;
  int prev_measure = -1;
  for (const auto& op : c.ops) {
    CompiledOp k;
    k.type = op.type;
    k.wires = op.wires;
    if (op.type == OpType::kGate) {
      k.full = embed_operator(op.gate_matrix(), std::span<const int>(op.wires), c.n_wires);
      if (op.is_uzz())
        k.noise = GateNoise::kUzz;
      else if (op.native && op.native->axis != Axis::kZ)
        k.noise = GateNoise::kSingle;
      if (fuse && !out.ops.empty() && out.ops.back().type == OpType::kGate) {
        out.ops.back().full = k.full * out.ops.back().full;
        continue;
      }
    } else if (op.type == OpType::kMeasure) {
      k.basis = op.basis;
      k.proj = {reg.projector(op.wires[0], op.basis, +1), reg.projector(op.wires[0], op.basis, -1)};
      k.label = static_cast<int>(out.measure_labels.size());
      out.measure_labels.push_back(op.label);
      if (prev_measure >= 0) out.pairs.emplace_back(prev_measure, k.label);
      prev_measure = k.label;
    } else if (op.type == OpType::kLeakCheck) {
      k.label = static_cast<int>(out.check_labels.size());
      out.check_labels.push_back(op.label);
    }
    out.ops.push_back(std::move(k));
  }
  return out;
}

inline std::uint32_t wire_mask(const std::vector<int>& wires) {
  std::uint32_t m = 0;
  for (int w : wires) m |= 1u << w;
  return m;
}

}  // namespace detail

using LabelPair = std::pair<std::string, std::string>;

struct ExactResult {
  Matrix bond_rho;               // bond register before any bond measurement (or at the end)
  Matrix bond_rho_postselected;  // same, conditioned on no wire ever having leaked
  std::map<std::string, double> marginals;
  std::map<std::string, double> marginals_postselected;
  std::map<LabelPair, double> pair_products;  // consecutive measurements
  std::map<LabelPair, double> pair_products_postselected;
  std::map<std::string, double> leak_probability;  // per LeakCheck label
  double retention = 1.0;                           // probability that no wire ever leaked
  std::vector<Matrix> bond_history;                 // bond state at each system reset, then the final state
  double max_trace_error = 0.0;
};

/// Density-matrix evolution. Mid-circuit outcomes are never branched on: each labeled
/// measurement carries a signed companion operator sum_s s rho_s, evolved by the same maps,
/// so marginals and consecutive-pair products come out exactly. Only leakage patterns branch.
inline ExactResult simulate_exact(const Circuit& circuit, const NoiseModel& noise = NoiseModel::none()) {
  const int n = circuit.n_wires;
  const detail::RegisterOps reg(n);
  const auto cc = detail::compile_circuit(circuit, noise, reg, false);
  const Eigen::Index dim = reg.dim;
  const int n_labels = static_cast<int>(cc.measure_labels.size());
  const int n_slots = n_labels + static_cast<int>(cc.pairs.size());
  std::vector<int> pair_slot_for(n_labels, -1);  // slot of the pair closed by label k
  for (std::size_t p = 0; p < cc.pairs.size(); ++p) pair_slot_for[cc.pairs[p].second] = n_labels + int(p);

  struct Branch {
    std::uint32_t leaked = 0, ever = 0, flagged = 0;
    Matrix rho;
    std::vector<Matrix> slots;  // empty matrix = inactive
  };
  auto for_each = [](Branch& b, const auto& f) {
    b.rho = f(b.rho);
    for (auto& s : b.slots)
      if (s.size()) s = f(s);
  };

  std::vector<Branch> branches(1);
  branches[0].rho = Matrix::Zero(dim, dim);
  branches[0].rho(0, 0) = 1.0;
  branches[0].slots.resize(n_slots);

  ExactResult res;
  std::vector<int> bond_wires;
  for (int w = 1; w < n; ++w) bond_wires.push_back(w);
  auto bond_state = [&](bool postselected) {
    Matrix rho = Matrix::Zero(dim, dim);
    for (const auto& b : branches)
      if (!postselected || b.ever == 0) rho += b.rho;
    const double tr = rho.trace().real();
    if (tr > 0) rho /= tr;
    return partial_trace_keep(rho, bond_wires, n);
  };
  bool bond_snapshot_taken = false;
  auto take_bond_snapshot = [&] {
    res.bond_rho = bond_state(false);
    res.bond_rho_postselected = bond_state(true);
    bond_snapshot_taken = true;
  };

  auto depolarize_wire = [&](Branch& b, int w, double p) {
    if (p <= 0 || (b.leaked >> w & 1u)) return;
    for_each(b, [&](const Matrix& m) { return Matrix((1 - p) * m + p * detail::trace_replace(m, w, n)); });
  };
  auto crosstalk = [&](std::vector<Branch>& bs, double eps) {
    if (eps <= 0) return;
    for (auto& b : bs)
      for (int w = 1; w < n; ++w) depolarize_wire(b, w, eps);
  };

  for (const auto& op : cc.ops) {
    std::vector<Branch> next;
    switch (op.type) {
      case OpType::kGate: {
        const std::uint32_t gm = detail::wire_mask(op.wires);
        for (auto& b : branches) {
          const std::uint32_t hit = b.leaked & gm;
          if (hit) {
            // Leaked participant: the unitary does not act; a two-qubit partner is scrambled.
            if (op.wires.size() == 2 && hit != gm)
              for (int w : op.wires)
                if (!(b.leaked >> w & 1u)) depolarize_wire(b, w, 1.0);
            next.push_back(std::move(b));
            continue;
          }
          for_each(b, [&](const Matrix& m) { return Matrix(op.full * m * op.full.adjoint()); });
          if (op.noise == detail::GateNoise::kSingle) depolarize_wire(b, op.wires[0], noise.p1);
          if (op.noise != detail::GateNoise::kUzz) {
            next.push_back(std::move(b));
            continue;
          }
          if (noise.p2 > 0) {
            const double p = noise.p2;
            for_each(b, [&](const Matrix& m) {
              return Matrix((1 - p) * m + p * detail::trace_replace(detail::trace_replace(m, op.wires[0], n), op.wires[1], n));
            });
          }
          if (noise.p_leak <= 0) {
            next.push_back(std::move(b));
            continue;
          }
          const double q = noise.p_leak;
          for (int pattern = 0; pattern < 4; ++pattern) {
            double w = 1.0;
            Branch nb = b;
            for (int i = 0; i < 2; ++i) {
              const int wire = op.wires[i];
              if (pattern >> i & 1) {
                w *= q;
                const auto& k = reg.leak_kraus[wire];
                for_each(nb, [&](const Matrix& m) {
                  return Matrix(k[0] * m * k[0].adjoint() + k[1] * m * k[1].adjoint());
                });
                nb.leaked |= 1u << wire;
                nb.ever |= 1u << wire;
              } else {
                w *= 1 - q;
              }
            }
            for_each(nb, [&](const Matrix& m) { return Matrix(w * m); });
            next.push_back(std::move(nb));
          }
        }
        break;
      }
      case OpType::kMeasure: {
        const int wire = op.wires[0];
        if (wire != 0 && !bond_snapshot_taken) take_bond_snapshot();
        const int slot = op.label;
        const int pslot = pair_slot_for[slot];
        const int prev = pslot >= 0 ? cc.pairs[pslot - n_labels].first : -1;
        for (auto& b : branches) {
          if (b.leaked >> wire & 1u) {
            b.slots[slot] = -b.rho;
            if (prev >= 0 && b.slots[prev].size()) b.slots[pslot] = -b.slots[prev];
            next.push_back(std::move(b));
            continue;
          }
          const auto& pp = op.proj[0];
          const auto& pm = op.proj[1];
          auto split = [&](const Matrix& m, double sign) {
            return Matrix(pp * m * pp + sign * (pm * m * pm));
          };
          if (prev >= 0 && b.slots[prev].size()) b.slots[pslot] = split(b.slots[prev], -1.0);
          b.slots[slot] = split(b.rho, -1.0);
          b.rho = split(b.rho, 1.0);
          for (int s = 0; s < n_slots; ++s)
            if (s != slot && s != pslot && b.slots[s].size()) b.slots[s] = split(b.slots[s], 1.0);
          next.push_back(std::move(b));
        }
        if (wire == 0) crosstalk(next, noise.eps_meas);
        break;
      }
      case OpType::kReset: {
        const int wire = op.wires[0];
        if (wire == 0) res.bond_history.push_back(bond_state(false));
        const auto& k = reg.reset_kraus[wire];
        for (auto& b : branches) {
          for_each(b, [&](const Matrix& m) { return Matrix(k[0] * m * k[0].adjoint() + k[1] * m * k[1].adjoint()); });
          b.leaked &= ~(1u << wire);
          next.push_back(std::move(b));
        }
        if (wire == 0) crosstalk(next, noise.eps_reset);
        break;
      }
      case OpType::kLeakCheck: {
        const std::uint32_t m = detail::wire_mask(op.wires);
        double p = 0;
        for (auto& b : branches) {
          if (b.ever & m) {
            b.flagged = 1;
            p += b.rho.trace().real();
          }
          next.push_back(std::move(b));
        }
        res.leak_probability[cc.check_labels[op.label]] = p;
        break;
      }
    }
    // Merge branches with the same classical leak state.
    branches.clear();
    for (auto& b : next) {
      auto it = std::find_if(branches.begin(), branches.end(), [&](const Branch& o) {
        return o.leaked == b.leaked && o.ever == b.ever && o.flagged == b.flagged;
      });
      if (it == branches.end()) {
        branches.push_back(std::move(b));
        continue;
      }
      it->rho += b.rho;
      for (int s = 0; s < n_slots; ++s) {
        if (!b.slots[s].size()) continue;
        if (it->slots[s].size())
          it->slots[s] += b.slots[s];
        else
          it->slots[s] = b.slots[s];
      }
    }
    double tr = 0;
    for (const auto& b : branches) tr += b.rho.trace().real();
    res.max_trace_error = std::max(res.max_trace_error, std::abs(tr - 1.0));
  }

  if (!bond_snapshot_taken) take_bond_snapshot();
  res.bond_history.push_back(res.bond_rho);

  double total = 0, kept = 0;
  for (const auto& b : branches) {
    const double t = b.rho.trace().real();
    total += t;
    if (b.ever == 0) kept += t;
  }
  res.retention = kept / total;
  auto slot_value = [&](int s, bool post) {
    double v = 0;
    for (const auto& b : branches)
      if ((!post || b.ever == 0) && b.slots[s].size()) v += b.slots[s].trace().real();
    const double norm = post ? kept : total;
    return norm > 0 ? v / norm : 0.0;
  };
  for (int l = 0; l < n_labels; ++l) {
    res.marginals[cc.measure_labels[l]] = slot_value(l, false);
    res.marginals_postselected[cc.measure_labels[l]] = slot_value(l, true);
  }
  for (std::size_t p = 0; p < cc.pairs.size(); ++p) {
    const LabelPair key{cc.measure_labels[cc.pairs[p].first], cc.measure_labels[cc.pairs[p].second]};
    res.pair_products[key] = slot_value(n_labels + int(p), false);
    res.pair_products_postselected[key] = slot_value(n_labels + int(p), true);
  }
  return res;
}

namespace detail {

/// One trajectory. Pure state plus leak flags; Kraus events are inserted stochastically.
inline ShotRecord run_trajectory(const CompiledCircuit& cc, const RegisterOps& reg, const NoiseModel& noise,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int n = cc.n;
  Vector psi = Vector::Zero(reg.dim);
  psi(0) = 1.0;
  std::uint32_t leaked = 0, ever = 0;

  auto random_pauli = [&](int w) {
    const int k = static_cast<int>(uni(rng) * 4) & 3;
    if (k) psi = reg.pauli[w][k] * psi;
  };
  auto depolarize_wire = [&](int w, double p) {
    if (p > 0 && !(leaked >> w & 1u) && uni(rng) < p) random_pauli(w);
  };
  // Projective Z measurement of one wire; returns the bit (0 or 1).
  auto measure_z_bit = [&](int w) {
    const Vector p0 = reg.reset_kraus[w][0] * psi;  // |0><0| psi
    const double prob0 = p0.squaredNorm();
    if (uni(rng) < prob0) {
      psi = p0 / std::sqrt(prob0);
      return 0;
    }
    psi = reg.projector(w, Axis::kZ, -1) * psi;
    psi /= psi.norm();
    return 1;
  };

  ShotRecord rec;
  rec.seed = seed;
  for (const auto& op : cc.ops) {
    switch (op.type) {
      case OpType::kGate: {
        const std::uint32_t gm = wire_mask(op.wires);
        const std::uint32_t hit = leaked & gm;
        if (hit) {
          if (op.wires.size() == 2 && hit != gm)
            for (int w : op.wires)
              if (!(leaked >> w & 1u)) random_pauli(w);
          break;
        }
        psi = op.full * psi;
        if (op.noise == GateNoise::kSingle) depolarize_wire(op.wires[0], noise.p1);
        if (op.noise == GateNoise::kUzz) {
          if (noise.p2 > 0 && uni(rng) < noise.p2) {
            random_pauli(op.wires[0]);
            random_pauli(op.wires[1]);
          }
          for (int w : op.wires) {
            if (noise.p_leak > 0 && uni(rng) < noise.p_leak) {
              if (measure_z_bit(w) == 0) psi = reg.pauli[w][1] * psi;
              leaked |= 1u << w;
              ever |= 1u << w;
            }
          }
        }
        break;
      }
      case OpType::kMeasure: {
        const int w = op.wires[0];
        int outcome = -1;
        if (!(leaked >> w & 1u)) {
          const Vector plus = op.proj[0] * psi;
          const double pp = plus.squaredNorm();
          if (uni(rng) < pp) {
            psi = plus / std::sqrt(pp);
            outcome = +1;
          } else {
            psi = op.proj[1] * psi;
            psi /= psi.norm();
          }
        }
        rec.outcomes[cc.measure_labels[op.label]] = outcome;
        if (w == 0)
          for (int b = 1; b < n; ++b) depolarize_wire(b, noise.eps_meas);
        break;
      }
      case OpType::kReset: {
        const int w = op.wires[0];
        if (measure_z_bit(w) == 1) psi = reg.pauli[w][1] * psi;
        leaked &= ~(1u << w);
        if (w == 0)
          for (int b = 1; b < n; ++b) depolarize_wire(b, noise.eps_reset);
        break;
      }
      case OpType::kLeakCheck: {
        const bool flag = (ever & wire_mask(op.wires)) != 0;
        rec.leak_checks[cc.check_labels[op.label]] = flag;
        rec.leaked = rec.leaked || flag;
        break;
      }
    }
  }
  return rec;
}

}  // namespace detail

/// Independent trajectories; shot i uses seed derive_seed(seed, i), so results do not depend
/// on the number of workers.
inline std::vector<ShotRecord> sample_shots(const Circuit& circuit, const NoiseModel& noise, int n_shots,
                                            std::uint64_t seed, int workers = 0) {
  if (n_shots < 1) throw Error("sample_shots: n_shots must be >= 1");
  const detail::RegisterOps reg(circuit.n_wires);
  const auto cc = detail::compile_circuit(circuit, noise, reg, !noise.any());
  std::vector<ShotRecord> out(n_shots);
  if (workers <= 0) workers = worker_count();
  workers = std::min(workers, n_shots);
  auto task = [&](int begin, int end) {
    for (int s = begin; s < end; ++s) out[s] = detail::run_trajectory(cc, reg, noise, derive_seed(seed, std::uint64_t(s)));
  };
  if (workers == 1) {
    task(0, n_shots);
    return out;
  }
  std::vector<std::thread> pool;
  const int chunk = (n_shots + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int b = w * chunk, e = std::min(n_shots, b + chunk);
    if (b < e) pool.emplace_back(task, b, e);
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace qmps
