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
#include "qmps/estimation.hpp"
#include "qmps/simulator.hpp"

#include <algorithm>
#include <random>

namespace qmps {
namespace {

Matrix random_density(int d, std::mt19937_64& rng, int rank) {
  std::normal_distribution<double> g;
  Matrix a(d, rank);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < rank; ++k) a(i, k) = Complex(g(rng), g(rng));
  Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a - b));
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Multinomial draw of every setting of an exact tomogram.
Tomogram sample_tomogram(const Tomogram& exact, long shots, std::mt19937_64& rng) {
  Tomogram t = exact;
  for (auto& [s, c] : t.counts) {
    std::discrete_distribution<int> pick(c.begin(), c.end());
    std::vector<double> n(c.size(), 0.0);
    for (long i = 0; i < shots; ++i) n[pick(rng)] += 1;
    c = n;
    t.shots_per_setting[s] = shots;
  }
  return t;
}

ShotRecord energy_shot(int x, int z1, int z2) {
  ShotRecord s;
  s.outcomes = {{"X3", x}, {"Z4", z1}, {"Z5", z2}};
  return s;
}

TEST(ProjectPsdTest, ClipsSmallNegativeWeight) {
  const Matrix rho = RealVector((RealVector(2) << 1.1, -0.1).finished()).cast<Complex>().asDiagonal();
  const auto p = project_psd(rho);
  EXPECT_TRUE(p.psd_projected);
  EXPECT_NEAR(p.raw_min_eigenvalue, -0.1, 1e-12);
  EXPECT_NEAR(std::abs(p.rho(0, 0) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(p.rho(1, 1)), 0.0, 1e-12);
}

TEST(ProjectPsdTest, SpreadsDeficitAcrossRemainingWeight) {
  const Matrix rho = RealVector((RealVector(4) << 0.6, 0.5, 0.1, -0.2).finished()).cast<Complex>().asDiagonal();
  const auto p = project_psd(rho);
  // -0.2 spread over three leaves 0.1 - 0.0667 > 0 for the next one.
  EXPECT_NEAR(p.rho(0, 0).real(), 0.6 - 0.2 / 3, 1e-12);
  EXPECT_NEAR(p.rho(2, 2).real(), 0.1 - 0.2 / 3, 1e-12);
  EXPECT_NEAR(p.rho(3, 3).real(), 0.0, 1e-12);
}

TEST(ProjectPsdTest, LeavesDensityMatricesAlone) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rho = random_density(4, rng, 1 + trial % 4);
    const auto p = project_psd(rho);
    EXPECT_LT((p.rho - rho).norm(), 1e-12);
    EXPECT_LT((project_psd(p.rho).rho - p.rho).norm(), 1e-12);
  }
}

TEST(ProjectPsdTest, RejectsNonHermitian) {
  Matrix m = Matrix::Identity(2, 2) / 2.0;
  m(0, 1) = 0.3;
  EXPECT_THROW(project_psd(m), Error);
}

// Frobenius-nearest by construction: never farther from the raw estimate than clipping.
TEST(ProjectPsdTest, NoFartherThanClipping) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.15);
  int strictly_closer = 0, trials = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix noise(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) noise(i, k) = Complex(g(rng), g(rng));
    noise = hermitian_part(noise);
    noise -= noise.trace() / 4.0 * Matrix::Identity(4, 4);
    const Matrix raw = random_density(4, rng, 1) + noise;
    const auto p = project_psd(raw);
    if (!p.psd_projected) continue;
    ++trials;
    const double dp = (p.rho - raw).norm(), dc = (oracle::clip_renormalize(raw) - raw).norm();
    EXPECT_LE(dp, dc + 1e-12);
    if (dp < dc - 1e-12) ++strictly_closer;
    EXPECT_NEAR(p.rho.trace().real(), 1.0, 1e-12);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(p.rho).eigenvalues().minCoeff(), -1e-12);
  }
  ASSERT_GT(trials, 500);
  EXPECT_GE(strictly_closer, 0.9 * trials);
}

TEST(ReconstructTest, SingleQubitFromExactTomogram) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rho = random_density(2, rng, 1 + trial % 2);
    const auto r = reconstruct_1q(exact_tomogram(rho, tomography_settings(1, false)));
    EXPECT_LT((r.rho - rho).norm(), 1e-12);
  }
}

TEST(ReconstructTest, TwoQubitFullFromExactTomogram) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rho = random_density(4, rng, 1 + trial % 4);
    const auto r = reconstruct_2q(exact_tomogram(rho, tomography_settings(2, false)), false);
    EXPECT_LT((r.rho - rho).norm(), 1e-12);
    EXPECT_EQ(r.status, Status::kOk);
  }
}

TEST(ReconstructTest, MissingSettingThrows) {
  Tomogram t = exact_tomogram(Matrix::Identity(2, 2) / 2.0, tomography_settings(1, false));
  t.counts.erase("Y");
  EXPECT_THROW(reconstruct_1q(t), Error);
  const Tomogram r = exact_tomogram(Matrix::Identity(4, 4) / 4.0, tomography_settings(2, true), true);
  EXPECT_THROW(reconstruct_2q(r, false), Error);
  EXPECT_NO_THROW(reconstruct_2q(r, true));
}

TEST(ReconstructTest, PooledPauliWeights) {
  const Tomogram t = exact_tomogram(Matrix::Identity(4, 4) / 4.0, tomography_settings(2, false));
  EXPECT_NEAR(estimate_pauli(t, "IX").weight, 3.0, 1e-12);
  EXPECT_NEAR(estimate_pauli(t, "XY").weight, 1.0, 1e-12);
  EXPECT_EQ(estimate_pauli(t, "IX").sigma, 0.0);
}

TEST(ReconstructTest, RestrictedFlagsAsymmetricState) {
  // |0><0| x I/2 carries <ZI> = 1, which the symmetric set cannot represent.
  Matrix rho = Matrix::Zero(4, 4);
  rho(0, 0) = rho(1, 1) = 0.5;
  std::mt19937_64 rng(4);
  const Tomogram t = sample_tomogram(exact_tomogram(rho, tomography_settings(2, false)), 400, rng);
  EXPECT_EQ(reconstruct_2q(t, true).status, Status::kWarning);
  EXPECT_EQ(reconstruct_2q(t, false).status, Status::kOk);
}

// Tomography of the simulated circuits reproduces the channel-iterated bond state.
TEST(ReconstructTest, ExactModeMatchesChannelIteration) {
  const auto opt = variational_optimize(1.3, 1, OptimizeMode::kAnsatz);
  const BoundaryState b = BoundaryState::basis(2);
  const int j = 9;
  Tomogram t;
  t.n_b = 1;
  for (const Circuit& c : build_tomography_circuits(IterationBlock(compile_ansatz(opt.params)), boundary_prep(b), j, false))
    t.counts[c.metadata.setting] = exact_outcome_probabilities(simulate_exact(c), 1);
  const Matrix expected = iterate_channel(bond_channel(opt.tensor), b.density(), j);
  EXPECT_LT((reconstruct_1q(t).rho - expected).norm(), 1e-10);
}

TEST(ReconstructTest, RestrictedEqualsFullForSymmetricChi4) {
  const auto opt = variational_optimize(1.05, 2, OptimizeMode::kAnsatz);
  const auto sp = transfer_spectrum(bond_channel(opt.tensor));
  const Matrix rho = sp.fixed_point;
  const auto full = reconstruct_2q(exact_tomogram(rho, tomography_settings(2, false)), false);
  const auto restricted = reconstruct_2q(exact_tomogram(rho, tomography_settings(2, true), true), true);
  EXPECT_LT((full.rho - restricted.rho).norm(), 1e-10);
  EXPECT_NEAR(von_neumann_entropy(full.rho), von_neumann_entropy(restricted.rho), 1e-10);
}

TEST(EnergyEstimateTest, DeterministicShots) {
  std::vector<ShotRecord> shots(100, energy_shot(1, 1, 1));
  const auto e = energy_from_records(shots, 0.5);
  EXPECT_DOUBLE_EQ(e.e, -1.5);
  EXPECT_DOUBLE_EQ(e.sigma, 0.0);
  EXPECT_EQ(e.n_shots, 100);
  shots.assign(10, energy_shot(-1, 1, -1));
  EXPECT_DOUBLE_EQ(energy_from_records(shots, 2.0).e, 3.0);
}

TEST(EnergyEstimateTest, FairCoins) {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin;
  auto pm = [&] { return coin(rng) ? 1 : -1; };
  std::vector<ShotRecord> shots;
  const int n = 40000;
  for (int i = 0; i < n; ++i) shots.push_back(energy_shot(pm(), pm(), pm()));
  const double lambda = 0.8;
  const auto e = energy_from_records(shots, lambda);
  const double sigma = std::sqrt((1 + lambda * lambda) / n);
  EXPECT_NEAR(e.sigma, sigma, 0.05 * sigma);
  EXPECT_LT(std::abs(e.e), 4 * sigma);
  EXPECT_NEAR(energy_bootstrap_sigma(shots, lambda, 400, 3), sigma, 0.1 * sigma);
}

TEST(EnergyEstimateTest, ShotOrderDoesNotMatter) {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution coin(0.7);
  auto pm = [&] { return coin(rng) ? 1 : -1; };
  std::vector<ShotRecord> shots;
  for (int i = 0; i < 500; ++i) shots.push_back(energy_shot(pm(), pm(), pm()));
  const auto a = energy_from_records(shots, 1.1);
  std::shuffle(shots.begin(), shots.end(), rng);
  const auto b = energy_from_records(shots, 1.1);
  EXPECT_NEAR(a.e, b.e, 1e-12);
  EXPECT_NEAR(a.sigma, b.sigma, 1e-12);
}

TEST(EnergyEstimateTest, LabelErrors) {
  EXPECT_THROW(energy_from_records({}, 1.0), Error);
  ShotRecord s;
  s.outcomes = {{"X3", 1}, {"Z4", 1}};
  EXPECT_THROW(energy_from_records({s}, 1.0), Error);
  s.outcomes = {{"X3", 1}, {"Z4", 1}, {"Z6", 1}};
  EXPECT_THROW(energy_from_records({s}, 1.0), Error);
  std::vector<ShotRecord> mixed{energy_shot(1, 1, 1), s};
  EXPECT_THROW(energy_from_records(mixed, 1.0), Error);
}

TEST(EnergyEstimateTest, ZNEPropagation) {
  EnergyEstimate base, folded;
  base.e = -1.2;
  base.sigma = 0.02;
  folded.e = -1.0;
  folded.sigma = 0.04;
  const auto z = zne_energy(base, folded);
  EXPECT_NEAR(z.e, -1.3, 1e-12);
  EXPECT_NEAR(z.sigma, std::sqrt(0.03 * 0.03 + 0.02 * 0.02), 1e-12);
}

TEST(EntropyEstimateTest, ExactLimits) {
  Matrix pure = Matrix::Zero(2, 2);
  pure(0, 0) = 1;
  const auto s0 = entropy_with_ci(exact_tomogram(pure, tomography_settings(1, false)), nullptr, 100, 1);
  EXPECT_NEAR(s0.entropy, 0.0, 1e-10);
  EXPECT_EQ(s0.sigma, 0.0);
  const auto s1 = entropy_with_ci(exact_tomogram(Matrix::Identity(2, 2) / 2.0, tomography_settings(1, false)), nullptr, 100, 1);
  EXPECT_NEAR(s1.entropy, 1.0, 1e-10);
  EXPECT_EQ(s1.sigma, 0.0);
  const auto s2 = entropy_with_ci(exact_tomogram(Matrix::Identity(4, 4) / 4.0, tomography_settings(2, true), true), nullptr, 100, 1, true);
  EXPECT_NEAR(s2.entropy, 2.0, 1e-10);
}

TEST(EntropyEstimateTest, Guards) {
  std::mt19937_64 rng(12);
  const Tomogram exact = exact_tomogram(Matrix::Identity(2, 2) / 2.0, tomography_settings(1, false));
  EXPECT_THROW(entropy_with_ci(sample_tomogram(exact, 49, rng), nullptr, 100, 1), Error);
  EXPECT_NO_THROW(entropy_with_ci(sample_tomogram(exact, 50, rng), nullptr, 100, 1));
  EXPECT_THROW(entropy_with_ci(exact, nullptr, 99, 1), Error);
  Tomogram bad = sample_tomogram(exact, 100, rng);
  bad.shots_per_setting["X"] = 101;
  EXPECT_THROW(entropy_with_ci(bad, nullptr, 100, 1), Error);
}

TEST(EntropyEstimateTest, SeededBootstrapIsReproducible) {
  std::mt19937_64 rng(13);
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.8;
  rho(1, 1) = 0.2;
  const Tomogram t = sample_tomogram(exact_tomogram(rho, tomography_settings(1, false)), 1000, rng);
  const auto a = entropy_with_ci(t, nullptr, 200, 42), b = entropy_with_ci(t, nullptr, 200, 42);
  EXPECT_EQ(a.entropy, b.entropy);
  EXPECT_EQ(a.sigma, b.sigma);
}

TEST(EntropyEstimateTest, BootstrapSigmaScalesAsInverseRootShots) {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.8;
  rho(1, 1) = 0.2;
  rho(0, 1) = rho(1, 0) = 0.1;
  const Tomogram exact = exact_tomogram(rho, tomography_settings(1, false));
  auto mean_sigma = [&](long shots) {
    std::mt19937_64 rng(14);
    double acc = 0;
    for (int r = 0; r < 5; ++r) acc += entropy_with_ci(sample_tomogram(exact, shots, rng), nullptr, 300, r).sigma;
    return acc / 5;
  };
  const double ratio = mean_sigma(1000) / mean_sigma(4000);
  EXPECT_NEAR(ratio, 2.0, 0.4);
}

TEST(EntropyEstimateTest, TraceDistanceShrinksWithShots) {
  std::mt19937_64 rng(15);
  const Matrix rho = random_density(4, rng, 2);
  const Tomogram exact = exact_tomogram(rho, tomography_settings(2, false));
  double previous = 1.0;
  for (long shots : {100, 1000, 10000}) {
    double acc = 0;
    for (int r = 0; r < 8; ++r) acc += trace_distance(reconstruct_2q(sample_tomogram(exact, shots, rng), false).rho, rho);
    const double d = acc / 8;
    EXPECT_LT(d, previous) << shots;
    previous = d;
  }
  EXPECT_LT(previous, 0.05);
}

TEST(EntropyEstimateTest, ZNEOnExactTomogramsIsLinear) {
  // Depolarized expectations scale by (1-p); folding triples the exponent to first order.
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.9;
  rho(1, 1) = 0.1;
  rho(0, 1) = rho(1, 0) = 0.2;
  auto shrink = [&](double f) { return Matrix(f * rho + (1 - f) * Matrix::Identity(2, 2) / 2.0); };
  const Tomogram base = exact_tomogram(shrink(0.99), tomography_settings(1, false));
  const Tomogram folded = exact_tomogram(shrink(0.97), tomography_settings(1, false));
  const auto z = entropy_with_ci(base, &folded, 100, 1);
  EXPECT_NEAR(z.entropy, von_neumann_entropy(rho), 1e-10);
}

}  // namespace
}  // namespace qmps
