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

// Shot records to physics: energy from the X, Z, Z schedule, bond-register tomography by
// linear inversion, PSD repair, entropy with bootstrap errors.

#include "qmps/mps_core.hpp"
#include "qmps/simulator.hpp"

#include <numeric>

namespace qmps {

/// Tensor product of Paulis, one letter per wire ("I", "X", "Y", "Z"); first letter is the
/// most significant qubit.
struct PauliOp {
  std::string labels;

  explicit PauliOp(std::string l) : labels(std::move(l)) {
    for (char c : labels)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') throw Error("PauliOp: bad letter in " + labels);
  }
  int n_qubits() const { return static_cast<int>(labels.size()); }
  bool is_identity() const { return labels.find_first_not_of('I') == std::string::npos; }
  Matrix matrix() const {
    std::vector<Matrix> f;
    for (char c : labels) f.push_back(c == 'I' ? pauli::I() : pauli_matrix(axis_from_char(c)));
    return kron_all(f);
  }
  /// All 4^n strings in lexicographic order over I, X, Y, Z.
  static std::vector<PauliOp> all(int n) {
    std::vector<PauliOp> out;
    const char letters[] = {'I', 'X', 'Y', 'Z'};
    for (int code = 0; code < (1 << (2 * n)); ++code) {
      std::string s(n, 'I');
      for (int k = 0; k < n; ++k) s[k] = letters[(code >> (2 * (n - 1 - k))) & 3];
      out.emplace_back(s);
    }
    return out;
  }
};

using PauliExpectations = std::map<std::string, double>;

/// Pauli terms a real, Z2-symmetric two-qubit bond state can carry in the ansatz bond gauge.
inline const std::vector<std::string>& symmetric_pauli_set() {
  static const std::vector<std::string> s{"II", "IX", "XI", "XX", "YZ", "ZY"};
  return s;
}

/// Outcome statistics per measurement setting. Outcome index: bit (n_b - 1 - k) is set when
/// bond qubit k + 1 read -1. Empty `shots_per_setting` means an exact (infinite-shot)
/// tomogram holding probabilities. Settings may hold different totals after post-selection.
struct Tomogram {
  int n_b = 1;
  std::map<std::string, std::vector<double>> counts;
  std::map<std::string, long> shots_per_setting;
  bool restricted = false;
  bool mitigated = false;

  bool exact() const { return shots_per_setting.empty(); }
  long min_shots() const {
    long m = std::numeric_limits<long>::max();
    for (const auto& [s, n] : shots_per_setting) m = std::min(m, n);
    return m;
  }

  void validate() const {
    if (counts.empty()) throw Error("Tomogram: no settings");
    for (const auto& [s, c] : counts) {
      if (static_cast<int>(s.size()) != n_b || c.size() != (std::size_t{1} << n_b)) throw Error("Tomogram: setting shape mismatch");
      double total = 0;
      for (double x : c) {
        if (x < 0) throw Error("Tomogram: negative count");
        total += x;
      }
      if (!exact() && !shots_per_setting.count(s)) throw Error("Tomogram: no declared shots for setting " + s);
      const double expect = exact() ? 1.0 : double(shots_per_setting.at(s));
      if (std::abs(total - expect) > 1e-9 * std::max(1.0, expect)) throw Error("Tomogram: totals do not match declared shots");
    }
  }
};

/// Count table from the shots of one setting's circuit (labels b1..b_n).
inline std::vector<double> outcome_counts(const std::vector<ShotRecord>& shots, int n_b) {
  std::vector<double> c(std::size_t{1} << n_b, 0.0);
  for (const auto& s : shots) {
    std::size_t idx = 0;
    for (int k = 0; k < n_b; ++k) {
      const auto it = s.outcomes.find(bond_label(k + 1));
      if (it == s.outcomes.end()) throw Error("outcome_counts: shot lacks bond label " + bond_label(k + 1));
      idx = (idx << 1) | (it->second < 0 ? 1u : 0u);
    }
    c[idx] += 1;
  }
  return c;
}

/// Tomogram from per-setting shot lists.
inline Tomogram tomogram_from_shots(int n_b, const std::map<std::string, std::vector<ShotRecord>>& shots, bool restricted) {
  Tomogram t;
  t.n_b = n_b;
  t.restricted = restricted;
  for (const auto& [setting, list] : shots) {
    t.counts[setting] = outcome_counts(list, n_b);
    t.shots_per_setting[setting] = static_cast<long>(list.size());
  }
  return t;
}

/// Exact outcome probabilities of one setting from exact-mode marginals of b1 (b2) and their
/// product.
inline std::vector<double> exact_outcome_probabilities(const ExactResult& r, int n_b, bool postselected = false) {
  const auto& m = postselected ? r.marginals_postselected : r.marginals;
  const auto& pp = postselected ? r.pair_products_postselected : r.pair_products;
  std::vector<double> p(std::size_t{1} << n_b);
  if (n_b == 1) {
    const double a = m.at(bond_label(1));
    p = {0.5 * (1 + a), 0.5 * (1 - a)};
  } else if (n_b == 2) {
    const double a = m.at(bond_label(1)), b = m.at(bond_label(2));
    const double ab = pp.at({bond_label(1), bond_label(2)});
    for (int idx = 0; idx < 4; ++idx) {
      const double s1 = (idx & 2) ? -1 : 1, s2 = (idx & 1) ? -1 : 1;
      p[idx] = 0.25 * (1 + s1 * a + s2 * b + s1 * s2 * ab);
    }
  } else {
    throw Error("exact_outcome_probabilities: n_b must be 1 or 2");
  }
  return p;
}

/// Exact tomogram of a bond density matrix for the given settings.
inline Tomogram exact_tomogram(const Matrix& rho, const std::vector<TomographySetting>& settings, bool restricted = false) {
  Tomogram t;
  t.n_b = log2_exact(rho.rows());
  t.restricted = restricted;
  for (const auto& s : settings) {
    std::vector<double> p(std::size_t{1} << t.n_b);
    for (std::size_t idx = 0; idx < p.size(); ++idx) {
      std::vector<Matrix> f;
      for (int k = 0; k < t.n_b; ++k) {
        const double sign = (idx >> (t.n_b - 1 - k) & 1) ? -1.0 : 1.0;
        f.push_back(0.5 * (pauli::I() + sign * pauli_matrix(s[k])));
      }
      p[idx] = std::max(0.0, (kron_all(f) * rho).trace().real());
    }
    t.counts[setting_name(s)] = p;
  }
  return t;
}

struct PauliEstimate {
  double mean = 0.0;
  double sigma = 0.0;  // binomial standard error; 0 for exact data
  double weight = 0.0;
};

/// Estimate of one Pauli string, pooled over all settings that measure it.
inline PauliEstimate estimate_pauli(const Tomogram& t, const std::string& p) {
  PauliEstimate e;
  double acc = 0;
  for (const auto& [s, c] : t.counts) {
    bool ok = true;
    for (int k = 0; k < t.n_b; ++k)
      if (p[k] != 'I' && p[k] != s[k]) ok = false;
    if (!ok) continue;
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
      int sign = 1;
      for (int k = 0; k < t.n_b; ++k)
        if (p[k] != 'I' && (idx >> (t.n_b - 1 - k) & 1)) sign = -sign;
      acc += sign * c[idx];
    }
    e.weight += std::accumulate(c.begin(), c.end(), 0.0);
  }
  if (e.weight <= 0) throw Error("estimate_pauli: no setting measures " + p);
  e.mean = acc / e.weight;
  if (!t.exact()) {
    const double n = e.weight;
    e.sigma = std::sqrt(std::max(0.0, 1 - e.mean * e.mean) / n);
  }
  return e;
}

/// Pauli expectations needed for reconstruction. Restricted mode returns only the symmetric
/// set; full mode all 4^n_b strings.
inline PauliExpectations expectations_from_tomogram(const Tomogram& t, bool restricted) {
  if (t.n_b == 1) {
    for (const char* s : {"X", "Y", "Z"})
      if (!t.counts.count(s)) throw Error(std::string("tomogram: missing setting ") + s);
    return {{"I", 1.0}, {"X", estimate_pauli(t, "X").mean}, {"Y", estimate_pauli(t, "Y").mean}, {"Z", estimate_pauli(t, "Z").mean}};
  }
  if (t.n_b != 2) throw Error("tomogram: n_b must be 1 or 2");
  PauliExpectations out;
  for (const auto& s : tomography_settings(2, restricted))
    if (!t.counts.count(setting_name(s))) throw Error("tomogram: missing setting " + setting_name(s));
  if (restricted) {
    for (const auto& p : symmetric_pauli_set()) out[p] = p == "II" ? 1.0 : estimate_pauli(t, p).mean;
    return out;
  }
  for (const auto& p : PauliOp::all(2)) out[p.labels] = p.is_identity() ? 1.0 : estimate_pauli(t, p.labels).mean;
  return out;
}

struct DensityEstimate {
  Matrix rho;
  bool psd_projected = false;
  double raw_min_eigenvalue = 0.0;
  Status status = Status::kOk;
  std::string message;
};

/// Nearest unit-trace PSD matrix by eigenvalue water-filling: going up from the smallest
/// eigenvalue, negative ones are zeroed and their weight spread evenly over the rest.
inline DensityEstimate project_psd(const Matrix& rho) {
  if (!is_hermitian(rho, 1e-8)) throw Error("project_psd: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(rho));
  const RealVector mu = es.eigenvalues();  // ascending
  const Eigen::Index d = mu.size();
  DensityEstimate out;
  out.raw_min_eigenvalue = mu(0);
  if (mu(0) >= 0.0) {
    out.rho = rho;
    return out;
  }
  RealVector lam = mu;
  double deficit = 0.0;
  Eigen::Index i = 0;  // eigenvalues below i are zeroed
  while (i < d && mu(i) + deficit / double(d - i) < 0) {
    deficit += mu(i);
    lam(i) = 0.0;
    ++i;
  }
  for (Eigen::Index k = i; k < d; ++k) lam(k) = mu(k) + deficit / double(d - i);
  out.rho = es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  out.psd_projected = true;
  return out;
}

/// rho = 2^-n sum_P <P> P, then PSD projection.
inline DensityEstimate assemble_density(const PauliExpectations& e, int n_b) {
  const Eigen::Index d = Eigen::Index{1} << n_b;
  Matrix rho = Matrix::Zero(d, d);
  for (const auto& [p, v] : e) {
    if (static_cast<int>(p.size()) != n_b) throw Error("assemble_density: Pauli length mismatch");
    rho += v * PauliOp(p).matrix();
  }
  rho /= double(d);
  return project_psd(hermitian_part(rho));
}

inline DensityEstimate reconstruct_1q(const Tomogram& t) {
  if (t.n_b != 1) throw Error("reconstruct_1q: tomogram is not single-qubit");
  return assemble_density(expectations_from_tomogram(t, false), 1);
}

/// Largest |<P>| / sigma over Paulis the symmetric state must not carry, from full-setting data.
inline double symmetry_violation(const Tomogram& t) {
  double worst = 0;
  const auto& allowed = symmetric_pauli_set();
  for (const auto& p : PauliOp::all(2)) {
    if (std::find(allowed.begin(), allowed.end(), p.labels) != allowed.end()) continue;
    const auto e = estimate_pauli(t, p.labels);
    const double z = e.sigma > 0 ? std::abs(e.mean) / e.sigma : (std::abs(e.mean) > 1e-9 ? INFINITY : 0.0);
    worst = std::max(worst, z);
  }
  return worst;
}

inline DensityEstimate reconstruct_2q(const Tomogram& t, bool restricted) {
  if (t.n_b != 2) throw Error("reconstruct_2q: tomogram is not two-qubit");
  DensityEstimate out = assemble_density(expectations_from_tomogram(t, restricted), 2);
  if (restricted && t.counts.size() == 9) {
    const double z = symmetry_violation(t);
    if (z > 3.0) {
      out.status = Status::kWarning;
      out.message = "state violates the Z2 symmetry assumed by restricted tomography (" + std::to_string(z) + " sigma)";
    }
  }
  return out;
}

inline DensityEstimate reconstruct(const Tomogram& t, bool restricted) {
  return t.n_b == 1 ? reconstruct_1q(t) : reconstruct_2q(t, restricted);
}

inline double von_neumann_entropy(const Matrix& rho) { return entanglement_entropy(rho).entropy_bits; }

// ---------------------------------------------------------------------------
// Energy.

struct EnergyEstimate {
  double e = 0.0;
  double sigma = 0.0;
  long n_shots = 0;
  double mean_x = 0.0;
  double mean_zz = 0.0;
};

struct EnergyLabels {
  std::string x, z1, z2;
};

/// Labels from the default schedule naming (basis letter + iteration): the last X and the
/// last two Z measurements.
inline EnergyLabels infer_energy_labels(const ShotRecord& shot) {
  std::vector<std::pair<int, std::string>> xs, zs;
  for (const auto& [label, v] : shot.outcomes) {
    if (label.size() < 2 || !std::isdigit(static_cast<unsigned char>(label[1]))) continue;
    const int it = std::stoi(label.substr(1));
    if (label[0] == 'X') xs.emplace_back(it, label);
    if (label[0] == 'Z') zs.emplace_back(it, label);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(zs.begin(), zs.end());
  if (xs.empty() || zs.size() < 2) throw Error("energy_from_records: shots lack one X and two Z labels");
  const auto& z1 = zs[zs.size() - 2];
  const auto& z2 = zs.back();
  if (z2.first != z1.first + 1) throw Error("energy_from_records: Z measurements are not consecutive");
  return {xs.back().second, z1.second, z2.second};
}

/// e = -(<ZZ> + lambda <X>) with the standard error of the per-shot values
/// -(z1 z2 + lambda x), so X/ZZ correlations within a shot are accounted for.
inline EnergyEstimate energy_from_records(const std::vector<ShotRecord>& shots, double lambda,
                                          std::optional<EnergyLabels> labels = std::nullopt) {
  if (shots.empty()) throw Error("energy_from_records: no shots");
  const EnergyLabels l = labels ? *labels : infer_energy_labels(shots.front());
  double sx = 0, szz = 0, se = 0, se2 = 0;
  for (const auto& s : shots) {
    const auto x = s.outcomes.find(l.x), z1 = s.outcomes.find(l.z1), z2 = s.outcomes.find(l.z2);
    if (x == s.outcomes.end() || z1 == s.outcomes.end() || z2 == s.outcomes.end())
      throw Error("energy_from_records: shot missing an energy label");
    const double zz = z1->second * z2->second;
    const double e = -(zz + lambda * x->second);
    sx += x->second;
    szz += zz;
    se += e;
    se2 += e * e;
  }
  const double n = double(shots.size());
  EnergyEstimate out;
  out.n_shots = static_cast<long>(shots.size());
  out.mean_x = sx / n;
  out.mean_zz = szz / n;
  out.e = -(out.mean_zz + lambda * out.mean_x);
  const double var = n > 1 ? std::max(0.0, (se2 - se * se / n) / (n - 1)) : 0.0;
  out.sigma = std::sqrt(var / n);
  return out;
}

/// Bootstrap standard deviation of the energy over resampled shot lists.
inline double energy_bootstrap_sigma(const std::vector<ShotRecord>& shots, double lambda, int b, std::uint64_t seed) {
  const EnergyLabels l = infer_energy_labels(shots.at(0));
  std::vector<double> per_shot;
  for (const auto& s : shots) per_shot.push_back(-(s.outcomes.at(l.z1) * s.outcomes.at(l.z2) + lambda * s.outcomes.at(l.x)));
  std::vector<double> means;
  for (int r = 0; r < b; ++r) {
    std::mt19937_64 rng(derive_seed(seed, std::uint64_t(r)));
    std::uniform_int_distribution<std::size_t> pick(0, per_shot.size() - 1);
    double acc = 0;
    for (std::size_t i = 0; i < per_shot.size(); ++i) acc += per_shot[pick(rng)];
    means.push_back(acc / double(per_shot.size()));
  }
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / b;
  double v = 0;
  for (double m : means) v += (m - mu) * (m - mu);
  return std::sqrt(v / std::max(1, b - 1));
}

/// Zero-noise extrapolated energy; sigma by propagation through E1 - (E3 - E1)/2.
inline EnergyEstimate zne_energy(const EnergyEstimate& base, const EnergyEstimate& folded) {
  EnergyEstimate out;
  out.e = zne_extrapolate(base.e, folded.e);
  out.mean_x = zne_extrapolate(base.mean_x, folded.mean_x);
  out.mean_zz = zne_extrapolate(base.mean_zz, folded.mean_zz);
  out.sigma = std::hypot(1.5 * base.sigma, 0.5 * folded.sigma);
  out.n_shots = base.n_shots + folded.n_shots;
  return out;
}

// ---------------------------------------------------------------------------
// Entropy with bootstrap errors.

struct EntropyEstimate {
  double entropy = 0.0;
  double sigma = 0.0;
  DensityEstimate density;
};

namespace detail {

inline DensityEstimate tomography_pipeline(const Tomogram& base, const Tomogram* folded, bool restricted) {
  if (!folded) return reconstruct(base, restricted);
  ZNEPair pair{expectations_from_tomogram(base, restricted), expectations_from_tomogram(*folded, restricted)};
  return assemble_density(zne_extrapolate(pair), base.n_b);
}

/// Multinomial resample of every setting's counts.
inline Tomogram resample(const Tomogram& t, std::mt19937_64& rng) {
  Tomogram r = t;
  for (auto& [s, c] : r.counts) {
    const double n = std::accumulate(c.begin(), c.end(), 0.0);
    long remaining = std::lround(n);
    double mass = 1.0;
    const std::vector<double> p = t.counts.at(s);
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double pk = p[k] / n;
      long draw = remaining;
      if (k + 1 < c.size()) {
        const double q = mass > 0 ? std::clamp(pk / mass, 0.0, 1.0) : 0.0;
        draw = std::binomial_distribution<long>(remaining, q)(rng);
      }
      c[k] = double(draw);
      remaining -= draw;
      mass -= pk;
    }
  }
  return r;
}

}  // namespace detail

inline constexpr long kMinShotsPerSetting = 50;

/// Point estimate: (ZNE on expectations when `folded` is given) -> assemble -> PSD -> S.
/// Sigma: standard deviation over `bootstrap_b` multinomial resamples, full pipeline each time.
/// Exact tomograms give sigma = 0.
inline EntropyEstimate entropy_with_ci(const Tomogram& base, const Tomogram* folded, int bootstrap_b, std::uint64_t seed,
                                       bool restricted = false) {
  if (bootstrap_b < 100) throw Error("entropy_with_ci: bootstrap_b must be >= 100");
  for (const Tomogram* t : {&base, folded}) {
    if (!t) continue;
    t->validate();
    if (!t->exact() && t->min_shots() < kMinShotsPerSetting)
      throw Error("entropy_with_ci: fewer than 50 shots per setting");
  }
  EntropyEstimate out;
  out.density = detail::tomography_pipeline(base, folded, restricted);
  out.entropy = von_neumann_entropy(out.density.rho);
  if (base.exact() && (!folded || folded->exact())) return out;

  std::vector<double> samples(bootstrap_b);
  auto task = [&](int begin, int end) {
    for (int b = begin; b < end; ++b) {
      std::mt19937_64 rng(derive_seed(seed, std::uint64_t(b)));
      const Tomogram rb = base.exact() ? base : detail::resample(base, rng);
      std::optional<Tomogram> rf;
      if (folded) rf = folded->exact() ? *folded : detail::resample(*folded, rng);
      samples[b] = von_neumann_entropy(detail::tomography_pipeline(rb, rf ? &*rf : nullptr, restricted).rho);
    }
  };
  const int workers = std::min(worker_count(), bootstrap_b);
  if (workers == 1) {
    task(0, bootstrap_b);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (bootstrap_b + workers - 1) / workers;
    for (int w = 0; w < workers; ++w)
      if (w * chunk < bootstrap_b) pool.emplace_back(task, w * chunk, std::min(bootstrap_b, (w + 1) * chunk));
    for (auto& t : pool) t.join();
  }
  const double mu = std::accumulate(samples.begin(), samples.end(), 0.0) / bootstrap_b;
  double v = 0;
  for (double s : samples) v += (s - mu) * (s - mu);
  out.sigma = std::sqrt(v / (bootstrap_b - 1));
  return out;
}

}  // namespace qmps
