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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmps/circuit.hpp"
#include "qmps/estimation.hpp"
#include "qmps/simulator.hpp"

#include <random>

namespace qmps {
namespace {

// Bond wire 1 controls the system: the exact lambda = 0 embedding.
UnitaryGate ordered_embedding() { return UnitaryGate(swap_matrix() * cnot_matrix() * swap_matrix()); }

struct Chi2Point {
  OptimizeResult opt;
  ChannelSpectrum spectrum;
  int burn_in = 0;
};

const Chi2Point& point_1p2() {
  static const Chi2Point p = [] {
    Chi2Point c;
    c.opt = variational_optimize(1.2, 1, OptimizeMode::kAnsatz);
    c.spectrum = transfer_spectrum(bond_channel(c.opt.tensor));
    c.burn_in = burn_in_length(c.spectrum, 1e-4);
    return c;
  }();
  return p;
}

std::vector<OpType> types(const Circuit& c) {
  std::vector<OpType> t;
  for (const auto& o : c.ops) t.push_back(o.type);
  return t;
}

TEST(CircuitBuildTest, SingleIterationTomography) {
  const Circuit c = build_state_prep_circuit(IterationBlock(UnitaryGate(Matrix::Identity(4, 4))), boundary_prep(BoundaryState::basis(2)), 1,
                                             Purpose::kTomography, {Axis::kX});
  EXPECT_EQ(types(c), (std::vector<OpType>{OpType::kReset, OpType::kGate, OpType::kMeasure}));
  EXPECT_EQ(c.ops.back().wires, std::vector<int>{1});
  EXPECT_EQ(c.ops.back().basis, Axis::kX);
  EXPECT_EQ(c.ops.back().label, "b1");
  EXPECT_EQ(c.metadata.setting, "X");
}

TEST(CircuitBuildTest, EnergyScheduleOnLastIterations) {
  std::mt19937_64 rng(1);
  const Circuit c = build_state_prep_circuit(IterationBlock(UnitaryGate(random_unitary(4, rng))), boundary_prep(BoundaryState::basis(2)), 5,
                                             Purpose::kEnergy);
  EXPECT_EQ(c.count(OpType::kMeasure), 3);
  EXPECT_EQ(c.labels(), (std::vector<std::string>{"X3", "Z4", "Z5"}));
  for (std::size_t i = 0; i < c.ops.size(); ++i) {
    if (c.ops[i].type != OpType::kMeasure) continue;
    EXPECT_EQ(c.ops[i].wires, std::vector<int>{0});
    if (i + 1 < c.ops.size())
      EXPECT_EQ(c.ops[i + 1].type, OpType::kReset);
    else
      EXPECT_EQ(c.ops[i].label, "Z5");
  }
}

TEST(CircuitBuildTest, ScheduleLongerThanDepthThrows) {
  EXPECT_THROW(build_state_prep_circuit(IterationBlock(UnitaryGate(Matrix::Identity(4, 4))), boundary_prep(BoundaryState::basis(2)), 2,
                                        Purpose::kEnergy),
               Error);
}

TEST(CircuitBuildTest, ValidationCatchesMisuse) {
  Circuit c;
  c.n_wires = 2;
  c.ops = {CircuitOp::measure(0, Axis::kZ, "a"), CircuitOp::measure(1, Axis::kZ, "a")};
  EXPECT_THROW(c.validate(), Error);  // duplicate label
  c.ops = {CircuitOp::measure(0, Axis::kZ, "a"), CircuitOp::gate(NativeOp::rot(Axis::kX, 0.1, 0))};
  EXPECT_THROW(c.validate(), Error);  // gate on a measured system wire
  c.ops = {CircuitOp::measure(0, Axis::kZ, "a"), CircuitOp::reset(0), CircuitOp::gate(NativeOp::rot(Axis::kX, 0.1, 0))};
  EXPECT_NO_THROW(c.validate());
  c.ops = {CircuitOp::gate(NativeOp::rot(Axis::kX, 0.1, 2))};
  EXPECT_THROW(c.validate(), Error);  // wire out of range
  c.ops = {CircuitOp::gate(Matrix::Ones(4, 4), {0, 1})};
  EXPECT_THROW(c.validate(), Error);  // not unitary
}

TEST(CircuitBuildTest, TomographySettings) {
  EXPECT_EQ(tomography_settings(1, false).size(), 3u);
  EXPECT_EQ(tomography_settings(2, false).size(), 9u);
  const auto r = tomography_settings(2, true);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(setting_name(r[0]), "XX");
  EXPECT_EQ(setting_name(r[1]), "YZ");
  EXPECT_EQ(setting_name(r[2]), "ZY");
  EXPECT_THROW(tomography_settings(3, false), Error);
  const auto circuits = build_tomography_circuits(IterationBlock(UnitaryGate(Matrix::Identity(4, 4))), boundary_prep(BoundaryState::basis(2)), 2, false);
  ASSERT_EQ(circuits.size(), 3u);
  // Settings differ only in the terminal measurement.
  for (const auto& c : circuits) {
    EXPECT_EQ(c.ops.size(), circuits[0].ops.size());
    for (std::size_t i = 0; i + 1 < c.ops.size(); ++i) EXPECT_EQ(c.ops[i].type, circuits[0].ops[i].type);
  }
}

TEST(CircuitBuildTest, LeakCheckCoversAllWires) {
  std::mt19937_64 rng(2);
  const Circuit c = build_state_prep_circuit(IterationBlock(UnitaryGate(random_unitary(8, rng))), boundary_prep(BoundaryState::basis(4)), 3,
                                             Purpose::kEnergy, {}, true);
  EXPECT_EQ(c.ops.back().type, OpType::kLeakCheck);
  EXPECT_EQ(c.ops.back().wires, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(c.ops.back().label, kLeakLabel);
}

TEST(SimulateExactTest, BondStateFollowsChannelIteration) {
  std::mt19937_64 rng(3);
  for (int n_b : {1, 2}) {
    const UnitaryGate u(random_unitary(2 << n_b, rng));
    const BoundaryState b(random_state(1 << n_b, rng));
    const int j = 6;
    const auto r = simulate_exact(build_state_prep_circuit(IterationBlock(u), boundary_prep(b), j, Purpose::kEnergy));
    const Matrix expected = iterate_channel(bond_channel(extract_isometry(u, n_b)), b.density(), j);
    EXPECT_LT((r.bond_rho - expected).norm(), 1e-12);
    EXPECT_LT(r.max_trace_error, 1e-10);
    ASSERT_EQ(static_cast<int>(r.bond_history.size()), j + 1);
    for (int k = 0; k <= j; ++k)
      EXPECT_LT((r.bond_history[k] - iterate_channel(bond_channel(extract_isometry(u, n_b)), b.density(), k)).norm(), 1e-12);
  }
}

TEST(SimulateExactTest, NativeFragmentMatchesDenseGate) {
  std::mt19937_64 rng(4);
  const UnitaryGate u(random_unitary(4, rng));
  const BoundaryState b(random_state(2, rng));
  const auto dense = simulate_exact(build_state_prep_circuit(IterationBlock(u), boundary_prep(b), 5, Purpose::kEnergy));
  const auto native = simulate_exact(build_state_prep_circuit(IterationBlock(decompose_to_native(u)), boundary_prep(b), 5, Purpose::kEnergy));
  EXPECT_LT((dense.bond_rho - native.bond_rho).norm(), 1e-10);
  for (const auto& [k, v] : dense.marginals) EXPECT_NEAR(v, native.marginals.at(k), 1e-10);
}

TEST(SimulateExactTest, ProductEmbeddingKeepsBondPure) {
  const auto r = simulate_exact(build_state_prep_circuit(IterationBlock(UnitaryGate(kron(ry(0.7), pauli::I()))),
                                                         boundary_prep(BoundaryState::uniform(2)), 4, Purpose::kEnergy));
  EXPECT_NEAR(von_neumann_entropy(r.bond_rho), 0.0, 1e-10);
}

TEST(SimulateExactTest, OrderedEmbeddingGivesOneBit) {
  const auto r = simulate_exact(build_state_prep_circuit(IterationBlock(ordered_embedding()), boundary_prep(BoundaryState::uniform(2)), 3,
                                                         Purpose::kEnergy));
  EXPECT_LT((r.bond_rho - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_NEAR(von_neumann_entropy(r.bond_rho), 1.0, 1e-12);
  EXPECT_NEAR(r.marginals.at("Z3"), 0.0, 1e-12);
  EXPECT_NEAR(r.pair_products.at({"Z2", "Z3"}), 1.0, 1e-12);
}

TEST(SimulateExactTest, EnergyMarginalsMatchMpsExpectations) {
  const auto& p = point_1p2();
  const int j = p.burn_in + 3;
  const BoundaryState b = BoundaryState::basis(2);
  const auto r = simulate_exact(build_state_prep_circuit(IterationBlock(compile_ansatz(p.opt.params)), boundary_prep(b), j, Purpose::kEnergy));
  const std::string x = measurement_label(Axis::kX, j - 2), z1 = measurement_label(Axis::kZ, j - 1), z2 = measurement_label(Axis::kZ, j);
  EXPECT_NEAR(r.marginals.at(x), expectation_local(p.opt.tensor, b, j - 2, pauli::X()), 1e-10);
  EXPECT_NEAR(r.pair_products.at({z1, z2}), expectation_nn(p.opt.tensor, b, j - 1, pauli::Z(), pauli::Z()), 1e-10);
  const double e = -(r.pair_products.at({z1, z2}) + 1.2 * r.marginals.at(x));
  EXPECT_NEAR(e, p.opt.energy, 1e-4);  // burn-in tolerance
}

TEST(SimulateExactTest, Chi4EntropyMatchesHalfChain) {
  const auto opt = variational_optimize(1.05, 2, OptimizeMode::kAnsatz);
  const auto sp = transfer_spectrum(bond_channel(opt.tensor));
  const auto sel = select_boundary(sp);
  const int j = burn_in_length(sp, 1e-4);
  const auto r = simulate_exact(build_state_prep_circuit(IterationBlock(compile_ansatz(opt.params)), boundary_prep(sel.boundary), j,
                                                         Purpose::kTomography));
  EXPECT_NEAR(von_neumann_entropy(r.bond_rho), half_chain_entropy(opt.tensor, sel.boundary, j).entropy_bits, 1e-10);
}

TEST(SimulateExactTest, DeferredMeasurement) {
  std::mt19937_64 rng(5);
  for (int n_b : {1, 2}) {
    const Circuit c = build_state_prep_circuit(IterationBlock(UnitaryGate(random_unitary(2 << n_b, rng))),
                                               boundary_prep(BoundaryState(random_state(1 << n_b, rng))), 7, Purpose::kEnergy,
                                               {Axis::kX, Axis::kY, Axis::kZ, Axis::kZ, Axis::kX});
    Circuit stripped = c;
    std::erase_if(stripped.ops, [](const CircuitOp& o) { return o.type == OpType::kMeasure; });
    EXPECT_LT((simulate_exact(c).bond_rho - simulate_exact(stripped).bond_rho).norm(), 1e-12);
  }
}

// Brute force over all measurement records of a tiny circuit gives the same marginals.
TEST(SimulateExactTest, MarginalsMatchBranchEnumeration) {
  std::mt19937_64 rng(6);
  const UnitaryGate u(random_unitary(4, rng));
  const BoundaryState b(random_state(2, rng));
  const Circuit c = build_state_prep_circuit(IterationBlock(u), boundary_prep(b), 3, Purpose::kEnergy);
  const auto r = simulate_exact(c);

  // State vector on (system, bond); enumerate outcomes of the three system measurements.
  const Matrix hx = (pauli::X() + pauli::Z()) / std::sqrt(2.0);  // Hadamard
  double mean_x = 0, mean_zz = 0;
  for (int sx = 0; sx < 2; ++sx)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) {
        Vector v = b.vector;
        double prob = 1;
        const int outcomes[3] = {sx, s1, s2};
        for (int it = 0; it < 3; ++it) {
          Vector full = Vector::Zero(4);
          full.head(2) = v;
          full = u.matrix * full;
          if (it == 0) full = kron(hx, pauli::I()) * full;  // measure X
          Vector kept = outcomes[it] == 0 ? Vector(full.head(2)) : Vector(full.tail(2));
          prob *= kept.squaredNorm();
          if (kept.norm() > 0) kept.normalize();
          v = kept;
        }
        const double x = sx ? -1 : 1, zz = (s1 ^ s2) ? -1 : 1;
        mean_x += prob * x;
        mean_zz += prob * zz;
      }
  EXPECT_NEAR(r.marginals.at("X1"), mean_x, 1e-12);
  EXPECT_NEAR(r.pair_products.at({"Z2", "Z3"}), mean_zz, 1e-12);
}

// |S_k - S_inf| decays geometrically at the modulus of some channel eigenvalue, never slower
// than |mu_2|. From |0> the Z2-odd coherences stay empty, so the rate is a faster mode.
TEST(SimulateExactTest, EntropyTransientDecaysAtChannelEigenvalue) {
  const auto& p = point_1p2();
  const double mu = std::abs(p.spectrum.subdominant_eigenvalue);
  const double s_inf = entanglement_entropy(p.spectrum.fixed_point).entropy_bits;
  const int j = 12;
  const auto r = simulate_exact(build_state_prep_circuit(IterationBlock(compile_ansatz(p.opt.params)), boundary_prep(BoundaryState::basis(2)),
                                                         j, Purpose::kTomography));
  std::vector<double> d;
  for (int k = 0; k <= j; ++k) d.push_back(std::abs(von_neumann_entropy(r.bond_history[k]) - s_inf));
  for (int k = 3; k <= j; ++k) EXPECT_LE(d[k], d[2] * std::pow(mu, k - 2) * (1 + 1e-6)) << "k=" << k;
  const double rate = d[11] / d[10];
  double nearest = 1.0;
  for (Eigen::Index i = 1; i < p.spectrum.eigenvalues.size(); ++i)
    nearest = std::min(nearest, std::abs(std::abs(p.spectrum.eigenvalues(i)) - rate));
  EXPECT_LT(nearest, 1e-4) << "rate=" << rate;
}

TEST(SimulateExactTest, TracePreservedUnderNoise) {
  std::mt19937_64 rng(7);
  const Circuit c = build_state_prep_circuit(IterationBlock(compile_unitary(UnitaryGate(random_unitary(4, rng)))),
                                             boundary_prep(BoundaryState(random_state(2, rng))), 6, Purpose::kEnergy, {}, true);
  const auto r = simulate_exact(c, NoiseModel::default_profile());
  EXPECT_LT(r.max_trace_error, 1e-10);
  EXPECT_NEAR(r.bond_rho.trace().real(), 1.0, 1e-10);
  EXPECT_GT(r.retention, 0.0);
  EXPECT_LT(r.retention, 1.0);
}

TEST(SampleShotsTest, OrderedEmbeddingHasPerfectCorrelations) {
  const Circuit c = build_state_prep_circuit(IterationBlock(ordered_embedding()), boundary_prep(BoundaryState::uniform(2)), 4, Purpose::kEnergy,
                                             {Axis::kZ, Axis::kZ, Axis::kZ});
  const auto shots = sample_shots(c, NoiseModel::none(), 500, 1);
  int ups = 0;
  for (const auto& s : shots) {
    EXPECT_EQ(s.outcomes.at("Z2"), s.outcomes.at("Z3"));
    EXPECT_EQ(s.outcomes.at("Z3"), s.outcomes.at("Z4"));
    ups += s.outcomes.at("Z4") > 0;
  }
  EXPECT_GT(ups, 150);  // the sign itself is a fair coin
  EXPECT_LT(ups, 350);
}

TEST(SampleShotsTest, FairCoin) {
  Circuit c;
  c.n_wires = 1;
  c.ops = {CircuitOp::gate(NativeOp::rot(Axis::kY, kPi / 2, 0)), CircuitOp::measure(0, Axis::kZ, "m")};
  const int n = 100000;
  const auto shots = sample_shots(c, NoiseModel::none(), n, 99);
  double mean = 0;
  for (const auto& s : shots) mean += s.outcomes.at("m");
  mean /= n;
  EXPECT_LT(std::abs(mean), 4 / std::sqrt(double(n)));
}

TEST(SampleShotsTest, MarginalsConvergeToExact) {
  const auto& p = point_1p2();
  const int j = p.burn_in + 3;
  const Circuit c = build_state_prep_circuit(IterationBlock(compile_ansatz(p.opt.params)), boundary_prep(BoundaryState::basis(2)), j, Purpose::kEnergy);
  const auto exact = simulate_exact(c);
  const int n = 100000;
  const auto shots = sample_shots(c, NoiseModel::none(), n, 5);
  for (const auto& [label, m] : exact.marginals) {
    double mean = 0;
    for (const auto& s : shots) mean += s.outcomes.at(label);
    mean /= n;
    EXPECT_LT(std::abs(mean - m), 4 * std::sqrt((1 - m * m) / n) + 1e-12) << label;
  }
  for (const auto& [pair, m] : exact.pair_products) {
    double mean = 0;
    for (const auto& s : shots) mean += s.outcomes.at(pair.first) * s.outcomes.at(pair.second);
    mean /= n;
    EXPECT_LT(std::abs(mean - m), 4 * std::sqrt((1 - m * m) / n) + 1e-12) << pair.first << pair.second;
  }
}

// Trajectories and the density-matrix simulator implement the same noise channels.
TEST(SampleShotsTest, NoisyMarginalsMatchExactMode) {
  const auto& p = point_1p2();
  const Circuit c = build_state_prep_circuit(IterationBlock(compile_ansatz(p.opt.params)), boundary_prep(BoundaryState::uniform(2)), 8,
                                             Purpose::kEnergy, {Axis::kX, Axis::kZ, Axis::kZ, Axis::kY}, true);
  NoiseModel nm = NoiseModel::default_profile();
  nm.p2 = 0.05;  // large enough that the noise is visible at this shot count
  nm.p_leak = 0.01;
  const auto exact = simulate_exact(c, nm);
  const int n = 40000;
  const auto shots = sample_shots(c, nm, n, 6);
  double leaked = 0;
  for (const auto& s : shots) leaked += s.leak_checks.at(kLeakLabel);
  const double pl = exact.leak_probability.at(kLeakLabel);
  EXPECT_LT(std::abs(leaked / n - pl), 4 * std::sqrt(pl * (1 - pl) / n));
  for (const auto& [label, m] : exact.marginals) {
    double mean = 0;
    for (const auto& s : shots) mean += s.outcomes.at(label);
    mean /= n;
    EXPECT_LT(std::abs(mean - m), 4 * std::sqrt((1 - m * m) / n)) << label;
  }
  for (const auto& [pair, m] : exact.pair_products) {
    double mean = 0;
    for (const auto& s : shots) mean += s.outcomes.at(pair.first) * s.outcomes.at(pair.second);
    mean /= n;
    EXPECT_LT(std::abs(mean - m), 4 * std::sqrt((1 - m * m) / n)) << pair.first << pair.second;
  }
  // Post-selected marginals agree with the never-leaked branch.
  std::vector<ShotRecord> kept;
  for (const auto& s : shots)
    if (!s.leaked) kept.push_back(s);
  EXPECT_LT(std::abs(double(kept.size()) / n - exact.retention), 4 * std::sqrt(exact.retention * (1 - exact.retention) / n));
  for (const auto& [label, m] : exact.marginals_postselected) {
    double mean = 0;
    for (const auto& s : kept) mean += s.outcomes.at(label);
    mean /= double(kept.size());
    EXPECT_LT(std::abs(mean - m), 4 * std::sqrt((1 - m * m) / double(kept.size()))) << label;
  }
}

TEST(SampleShotsTest, EnergyWithinTwoSigmaOfMps) {
  const auto& p = point_1p2();
  const int j = p.burn_in + 3;
  const Circuit c = build_state_prep_circuit(IterationBlock(compile_ansatz(p.opt.params)), boundary_prep(BoundaryState::basis(2)), j, Purpose::kEnergy);
  const auto est = energy_from_records(sample_shots(c, NoiseModel::none(), 5000, 2024), 1.2);
  EXPECT_LT(std::abs(est.e - p.opt.energy), 2 * est.sigma);
}

TEST(SampleShotsTest, ReproducibleAndWorkerIndependent) {
  const auto& p = point_1p2();
  const Circuit c = build_state_prep_circuit(IterationBlock(compile_ansatz(p.opt.params)), boundary_prep(BoundaryState::basis(2)), 10,
                                             Purpose::kEnergy, {}, true);
  const auto nm = NoiseModel::default_profile();
  const auto a = sample_shots(c, nm, 300, 42, 1);
  const auto b = sample_shots(c, nm, 300, 42, 3);
  const auto d = sample_shots(c, nm, 300, 43, 1);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].outcomes, b[i].outcomes);
    EXPECT_EQ(a[i].leak_checks, b[i].leak_checks);
    EXPECT_EQ(a[i].seed, b[i].seed);
    differs = differs || a[i].outcomes != d[i].outcomes;
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(sample_shots(c, nm, 0, 1), Error);
}

TEST(SampleShotsTest, NoiseNeedsNativeGates) {
  std::mt19937_64 rng(8);
  const Circuit c = build_state_prep_circuit(IterationBlock(UnitaryGate(random_unitary(4, rng))), boundary_prep(BoundaryState::basis(2)), 4,
                                             Purpose::kEnergy);
  EXPECT_THROW(sample_shots(c, NoiseModel::default_profile(), 10, 1), Error);
  EXPECT_NO_THROW(sample_shots(c, NoiseModel::none(), 10, 1));
}

TEST(SampleShotsTest, CertainLeakageFlagsEveryShot) {
  const Circuit c = build_state_prep_circuit(IterationBlock(decompose_to_native(ordered_embedding())), boundary_prep(BoundaryState::basis(2)), 3,
                                             Purpose::kEnergy, {}, true);
  NoiseModel nm;
  nm.p_leak = 1.0;
  for (const auto& s : sample_shots(c, nm, 50, 3)) {
    EXPECT_TRUE(s.leaked);
    EXPECT_TRUE(s.leak_checks.at(kLeakLabel));
  }
  EXPECT_NEAR(simulate_exact(c, nm).retention, 0.0, 1e-15);
}

}  // namespace
}  // namespace qmps
