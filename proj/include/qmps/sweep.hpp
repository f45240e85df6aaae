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

// Sweep orchestration: energy and entropy sweeps over lambda, the parameter cache, result
// tables, and the validation suite.

#include "qmps/estimation.hpp"
#include "qmps/io.hpp"
#include "qmps/tfim_oracle.hpp"

#include <mutex>

namespace qmps {

enum class OutputFormat { kCsv, kJson };

struct SweepConfig {
  std::vector<double> lambda_grid;
  int n_b = 1;
  int shots = 5000;  // per circuit (per tomography setting)
  NoiseModel noise;
  bool zne = false;
  bool postselect = false;
  bool restricted_tomography = false;
  std::uint64_t seed = 2024;
  double burn_in_tol = 1e-4;
  int bootstrap_b = 1000;
  bool oracle_entropy = true;  // high bond-dimension reference column (slow near lambda = 1)
  OptimizeMode mode = OptimizeMode::kAnsatz;
  OptimizerConfig optimizer;
  std::string param_cache;  // JSON file; empty keeps the cache in memory only
  std::string output_path;
  OutputFormat format = OutputFormat::kCsv;

  void validate() const {
    if (lambda_grid.empty()) throw Error("SweepConfig: lambda grid is empty");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) throw Error("SweepConfig: lambda grid must be sorted");
    for (double l : lambda_grid)
      if (!(l >= 0)) throw Error("SweepConfig: lambda must be nonnegative");
    if (n_b != 1 && n_b != 2) throw Error("SweepConfig: n_b must be 1 or 2");
    if (shots < 1) throw Error("SweepConfig: shots must be >= 1");
    if (!(burn_in_tol > 0 && burn_in_tol < 1)) throw Error("SweepConfig: burn_in_tol must lie in (0, 1)");
    if (bootstrap_b < 100) throw Error("SweepConfig: bootstrap_b must be >= 100");
    noise.validate();
  }
};

/// Evenly spaced grid with `steps` points including both ends.
inline std::vector<double> linear_grid(double lo, double hi, int steps) {
  if (steps < 1) throw Error("linear_grid: steps must be >= 1");
  if (steps == 1) return {lo};
  std::vector<double> g(steps);
  for (int i = 0; i < steps; ++i) g[i] = lo + (hi - lo) * double(i) / double(steps - 1);
  return g;
}

// ---------------------------------------------------------------------------
// Parameter cache keyed by (lambda, n_b, mode).

class ParameterCache {
 public:
  explicit ParameterCache(std::string path = {}) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;  // first use: the file is created on save()
    const json j = read_json_file(path_);
    for (const auto& [k, v] : j.items()) entries_[k] = v.get<std::vector<double>>();
  }

  static std::string key(double lambda, int n_b, OptimizeMode mode) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g/%d/%s", lambda, n_b, to_string(mode));
    return buf;
  }

  /// Cached coordinates when present (default layout), else a fresh optimization.
  OptimizeResult get(double lambda, int n_b, OptimizeMode mode, const OptimizerConfig& config = {}) {
    const GateLayout layout = config.layout ? *config.layout : default_layout(n_b);
    const std::string k = key(lambda, n_b, mode);
    if (!config.layout) {
      std::lock_guard<std::mutex> lock(mu_);
      const auto it = entries_.find(k);
      if (it != entries_.end()) {
        const RealVector x = Eigen::Map<const RealVector>(it->second.data(), Eigen::Index(it->second.size()));
        return result_from_parameters(lambda, n_b, mode, x, layout);
      }
    }
    OptimizeResult r = variational_optimize(lambda, n_b, mode, config);
    if (!config.layout) {
      std::lock_guard<std::mutex> lock(mu_);
      entries_[k] = std::vector<double>(r.parameters.data(), r.parameters.data() + r.parameters.size());
      dirty_ = true;
    }
    return r;
  }

  void save() {
    std::lock_guard<std::mutex> lock(mu_);
    if (path_.empty() || !dirty_) return;
    json j = json::object();
    for (const auto& [k, v] : entries_) j[k] = v;
    write_text_file(path_, j.dump(1) + "\n");
    dirty_ = false;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  std::string path_;
  std::map<std::string, std::vector<double>> entries_;
  bool dirty_ = false;
  mutable std::mutex mu_;
};

/// Process-wide in-memory cache used when a sweep is not given one.
inline ParameterCache& shared_parameter_cache() {
  static ParameterCache cache;
  return cache;
}

/// Burn-in for a possibly degenerate channel: with several fixed points the transient is set
/// by the largest eigenvalue strictly inside the unit circle.
inline int iterations_for(const ChannelSpectrum& spectrum, double tol) {
  if (!spectrum.degenerate()) return burn_in_length(spectrum, tol);
  const double mu = std::abs(spectrum.subdominant_eigenvalue);
  if (mu <= 0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tol) / std::log(mu))));
}

// ---------------------------------------------------------------------------
// Energy sweep.

struct EnergyRow {
  double lambda = 0;
  int chi = 2;
  int iterations = 0;
  int uzz_per_iteration = 0;
  EnergyEstimate raw;
  std::optional<EnergyEstimate> folded;
  std::optional<EnergyEstimate> mitigated;
  double e = NAN;        // reported estimate (mitigated when ZNE ran)
  double e_sigma = NAN;
  double e_mps = NAN;    // classical expectation of the optimized MPS
  double e_exact = NAN;  // thermodynamic-limit ground-state energy density
  double retention = 1.0;
  long shots = 0;
  bool ok = true;
  std::string error;
};

namespace detail {

inline std::vector<ShotRecord> run_circuit_shots(const Circuit& c, const SweepConfig& cfg, std::uint64_t seed, double* retention) {
  auto shots = sample_shots(c, cfg.noise, cfg.shots, seed);
  if (cfg.postselect) {
    auto ps = leakage_postselect(shots);
    if (retention) *retention = ps.retention;
    return std::move(ps.shots);
  }
  if (retention) *retention = 1.0;
  return shots;
}

inline std::uint64_t point_seed(std::uint64_t root, std::size_t index, std::uint64_t stream) {
  return derive_seed(derive_seed(root, index), stream);
}

}  // namespace detail

inline EnergyRow run_energy_point(double lambda, std::size_t index, const SweepConfig& cfg, ParameterCache& cache) {
  EnergyRow row;
  row.lambda = lambda;
  row.chi = 1 << cfg.n_b;
  try {
    row.e_exact = exact_energy_density(TFIMParams(lambda)).energy_density;
    const OptimizeResult opt = cache.get(lambda, cfg.n_b, cfg.mode, cfg.optimizer);
    row.e_mps = opt.energy;
    const ChannelSpectrum sp = transfer_spectrum(bond_channel(opt.tensor));
    const auto schedule = default_energy_schedule();
    row.iterations = iterations_for(sp, cfg.burn_in_tol) + static_cast<int>(schedule.size());
    const IterationBlock block = opt.mode == OptimizeMode::kAnsatz ? IterationBlock(compile_ansatz(opt.params))
                                                                   : IterationBlock(compile_unitary(opt.unitary));
    row.uzz_per_iteration = block.fragment->uzz_count();
    const BoundaryPrep prep = boundary_prep(BoundaryState::basis(row.chi));
    Circuit c = build_state_prep_circuit(block, prep, row.iterations, Purpose::kEnergy, schedule, cfg.postselect);
    c.metadata.lambda = lambda;

    const auto base = detail::run_circuit_shots(c, cfg, detail::point_seed(cfg.seed, index, 0), &row.retention);
    row.raw = energy_from_records(base, lambda);
    row.shots = static_cast<long>(base.size());
    row.e = row.raw.e;
    row.e_sigma = row.raw.sigma;
    if (cfg.zne) {
      const auto folded = detail::run_circuit_shots(fold_circuit(c), cfg, detail::point_seed(cfg.seed, index, 1), nullptr);
      row.folded = energy_from_records(folded, lambda);
      row.mitigated = zne_energy(row.raw, *row.folded);
      row.e = row.mitigated->e;
      row.e_sigma = row.mitigated->sigma;
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

/// One row per lambda; failures are recorded in the row and do not stop the sweep.
inline std::vector<EnergyRow> run_energy_sweep(const SweepConfig& cfg, ParameterCache* cache = nullptr) {
  cfg.validate();
  ParameterCache local(cfg.param_cache);
  ParameterCache& pc = cache ? *cache : (cfg.param_cache.empty() ? shared_parameter_cache() : local);
  std::vector<EnergyRow> rows;
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) rows.push_back(run_energy_point(cfg.lambda_grid[i], i, cfg, pc));
  pc.save();
  return rows;
}

// ---------------------------------------------------------------------------
// Entropy sweep.

struct EntropyRow {
  double lambda = 0;
  int chi = 2;
  int iterations = 0;
  int uzz_per_iteration = 0;
  EntropyEstimate raw;
  std::optional<EntropyEstimate> folded;
  std::optional<EntropyEstimate> mitigated;
  double entropy = NAN;  // reported estimate (mitigated when ZNE ran)
  double entropy_sigma = NAN;
  double entropy_mps = NAN;         // classical entropy of the same MPS, boundary and iteration count
  double entropy_fixed_point = NAN; // classical entropy of the channel fixed point
  double entropy_oracle = NAN;      // high bond-dimension reference; nan at lambda = 1
  bool oracle_converged = false;
  std::vector<double> schmidt_mps;
  std::vector<double> schmidt_estimate;
  double retention = 1.0;
  long shots = 0;  // per setting, after post-selection (minimum over settings)
  std::string density_status;
  bool ok = true;
  std::string error;
};

inline EntropyRow run_entropy_point(double lambda, std::size_t index, const SweepConfig& cfg, ParameterCache& cache) {
  EntropyRow row;
  row.lambda = lambda;
  row.chi = 1 << cfg.n_b;
  try {
    if (cfg.oracle_entropy && std::abs(lambda - 1.0) > 1e-12) {
      const auto o = exact_half_chain_entropy(TFIMParams(lambda));
      row.entropy_oracle = o.entropy_bits;
      row.oracle_converged = o.converged;
    }
    const OptimizeResult opt = cache.get(lambda, cfg.n_b, cfg.mode, cfg.optimizer);
    const ChannelSpectrum sp = transfer_spectrum(bond_channel(opt.tensor));
    const BoundarySelection sel = select_boundary(sp);
    row.iterations = iterations_for(sp, cfg.burn_in_tol);
    const auto classical = half_chain_entropy(opt.tensor, sel.boundary, row.iterations);
    row.entropy_mps = classical.entropy_bits;
    row.schmidt_mps = classical.schmidt_spectrum;
    row.entropy_fixed_point = entanglement_entropy(sp.fixed_point).entropy_bits;

    const IterationBlock block = opt.mode == OptimizeMode::kAnsatz ? IterationBlock(compile_ansatz(opt.params))
                                                                   : IterationBlock(compile_unitary(opt.unitary));
    row.uzz_per_iteration = block.fragment->uzz_count();
    const BoundaryPrep prep = boundary_prep(sel.boundary);
    const bool restricted = cfg.n_b == 2 && cfg.restricted_tomography;
    const auto circuits = build_tomography_circuits(block, prep, row.iterations, restricted, cfg.postselect);

    std::map<std::string, std::vector<ShotRecord>> base, folded;
    double kept = 0;
    for (std::size_t k = 0; k < circuits.size(); ++k) {
      const auto& c = circuits[k];
      double ret = 1;
      base[c.metadata.setting] = detail::run_circuit_shots(c, cfg, detail::point_seed(cfg.seed, index, 2 * k), &ret);
      kept += ret;
      if (cfg.zne)
        folded[c.metadata.setting] = detail::run_circuit_shots(fold_circuit(c), cfg, detail::point_seed(cfg.seed, index, 2 * k + 1), nullptr);
    }
    row.retention = kept / double(circuits.size());
    const Tomogram tb = tomogram_from_shots(cfg.n_b, base, restricted);
    row.shots = tb.min_shots();
    const std::uint64_t boot_seed = detail::point_seed(cfg.seed, index, 1000);
    row.raw = entropy_with_ci(tb, nullptr, cfg.bootstrap_b, boot_seed, restricted);
    row.entropy = row.raw.entropy;
    row.entropy_sigma = row.raw.sigma;
    const EntropyEstimate* reported = &row.raw;
    if (cfg.zne) {
      Tomogram tf = tomogram_from_shots(cfg.n_b, folded, restricted);
      row.folded = entropy_with_ci(tf, nullptr, cfg.bootstrap_b, boot_seed, restricted);
      tf.mitigated = true;
      row.mitigated = entropy_with_ci(tb, &tf, cfg.bootstrap_b, boot_seed, restricted);
      reported = &*row.mitigated;
      row.entropy = row.mitigated->entropy;
      row.entropy_sigma = row.mitigated->sigma;
    }
    row.schmidt_estimate = entanglement_entropy(reported->density.rho).schmidt_spectrum;
    row.density_status = reported->density.status == Status::kWarning ? reported->density.message : "ok";
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

inline std::vector<EntropyRow> run_entropy_sweep(const SweepConfig& cfg, ParameterCache* cache = nullptr) {
  cfg.validate();
  ParameterCache local(cfg.param_cache);
  ParameterCache& pc = cache ? *cache : (cfg.param_cache.empty() ? shared_parameter_cache() : local);
  std::vector<EntropyRow> rows;
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) rows.push_back(run_entropy_point(cfg.lambda_grid[i], i, cfg, pc));
  pc.save();
  return rows;
}

// ---------------------------------------------------------------------------
// Tables.

inline std::string energy_table_csv(const std::vector<EnergyRow>& rows, bool mitigated) {
  std::ostringstream out;
  out << "lambda,chi,iterations,e,e_sigma,e_raw,e_raw_sigma,e_folded,e_folded_sigma,e_mps,e_exact,mitigated,retention,shots,status\n";
  for (const auto& r : rows) {
    out << format_number(r.lambda) << ',' << r.chi << ',' << r.iterations << ',' << format_number(r.e) << ','
        << format_number(r.e_sigma) << ',' << format_number(r.ok ? r.raw.e : NAN) << ','
        << format_number(r.ok ? r.raw.sigma : NAN) << ',' << format_number(r.folded ? r.folded->e : NAN) << ','
        << format_number(r.folded ? r.folded->sigma : NAN) << ',' << format_number(r.e_mps) << ','
        << format_number(r.e_exact) << ',' << (mitigated ? 1 : 0) << ',' << format_number(r.retention) << ','
        << r.shots << ',' << (r.ok ? "ok" : "failed") << '\n';
  }
  return out.str();
}

inline json energy_table_json(const std::vector<EnergyRow>& rows, bool mitigated) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j{{"lambda", r.lambda}, {"chi", r.chi}, {"iterations", r.iterations}, {"uzz_per_iteration", r.uzz_per_iteration},
           {"e", r.e}, {"e_sigma", r.e_sigma}, {"e_mps", r.e_mps}, {"e_exact", r.e_exact}, {"mitigated", mitigated},
           {"retention", r.retention}, {"shots", r.shots}, {"ok", r.ok}};
    if (r.ok) j["raw"] = {{"e", r.raw.e}, {"sigma", r.raw.sigma}, {"mean_x", r.raw.mean_x}, {"mean_zz", r.raw.mean_zz}};
    if (r.folded) j["folded"] = {{"e", r.folded->e}, {"sigma", r.folded->sigma}};
    if (!r.ok) j["error"] = r.error;
    arr.push_back(j);
  }
  return arr;
}

inline std::string entropy_table_csv(const std::vector<EntropyRow>& rows, bool mitigated) {
  std::ostringstream out;
  out << "lambda,chi,iterations,entropy,entropy_sigma,entropy_raw,entropy_raw_sigma,entropy_folded,entropy_folded_sigma,"
         "entropy_mps,entropy_fixed_point,entropy_oracle,oracle_converged,mitigated,retention,shots,status\n";
  for (const auto& r : rows) {
    out << format_number(r.lambda) << ',' << r.chi << ',' << r.iterations << ',' << format_number(r.entropy) << ','
        << format_number(r.entropy_sigma) << ',' << format_number(r.ok ? r.raw.entropy : NAN) << ','
        << format_number(r.ok ? r.raw.sigma : NAN) << ',' << format_number(r.folded ? r.folded->entropy : NAN) << ','
        << format_number(r.folded ? r.folded->sigma : NAN) << ',' << format_number(r.entropy_mps) << ','
        << format_number(r.entropy_fixed_point) << ',' << format_number(r.entropy_oracle) << ','
        << (r.oracle_converged ? 1 : 0) << ',' << (mitigated ? 1 : 0) << ',' << format_number(r.retention) << ','
        << r.shots << ',' << (r.ok ? "ok" : "failed") << '\n';
  }
  return out.str();
}

inline json entropy_table_json(const std::vector<EntropyRow>& rows, bool mitigated) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j{{"lambda", r.lambda}, {"chi", r.chi}, {"iterations", r.iterations}, {"uzz_per_iteration", r.uzz_per_iteration},
           {"entropy", r.entropy}, {"entropy_sigma", r.entropy_sigma}, {"entropy_mps", r.entropy_mps},
           {"entropy_fixed_point", r.entropy_fixed_point}, {"oracle_converged", r.oracle_converged},
           {"schmidt_mps", r.schmidt_mps}, {"schmidt_estimate", r.schmidt_estimate}, {"mitigated", mitigated},
           {"retention", r.retention}, {"shots", r.shots}, {"ok", r.ok}};
    j["entropy_oracle"] = std::isnan(r.entropy_oracle) ? json(nullptr) : json(r.entropy_oracle);
    if (r.ok) {
      j["raw"] = {{"entropy", r.raw.entropy}, {"sigma", r.raw.sigma}};
      j["density_status"] = r.density_status;
    }
    if (r.folded) j["folded"] = {{"entropy", r.folded->entropy}, {"sigma", r.folded->sigma}};
    if (!r.ok) j["error"] = r.error;
    arr.push_back(j);
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Validation suite.

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
  }
  json to_json() const {
    json arr = json::array();
    for (const auto& c : checks)
      arr.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}, {"detail", c.detail}});
    return {{"passed", passed()}, {"checks", arr}};
  }
};

struct ValidationOptions {
  bool inject_kraus_fault = false;  // negative control: use V instead of V^T as Kraus operators
  bool include_chi4 = true;         // the chi = 4 tomography check needs one n_b = 2 optimization
};

inline ValidationReport run_validation(const SweepConfig& cfg, const ValidationOptions& vopt = {}, ParameterCache* cache = nullptr) {
  ValidationReport rep;
  ParameterCache& pc = cache ? *cache : shared_parameter_cache();
  auto check = [&](std::string name, double value, double tol, const auto& body_ok, std::string detail = {}) {
    rep.checks.push_back({std::move(name), body_ok, value, tol, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, const auto& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      rep.checks.push_back({name, false, NAN, 0.0, e.what()});
    }
  };
  std::mt19937_64 rng(cfg.seed);

  guarded("isometry_round_trip", [&] {
    const int n_b = 2;
    const UnitaryGate u(random_unitary(8, rng));
    const MPSTensor v = extract_isometry(u, n_b);
    const MPSTensor back = extract_isometry(complete_isometry(v), n_b);
    double err = 0;
    for (int s = 0; s < 2; ++s) err = std::max(err, (back.site_matrix(s) - v.site_matrix(s)).norm());
    check("isometry_round_trip", err, 1e-12, is_isometry(v, 1e-12) && err <= 1e-12);
  });

  guarded("channel_consistency", [&] {
    const UnitaryGate u(random_unitary(4, rng));
    MPSTensor tensor = extract_isometry(u, 1);
    const BoundaryState boundary(random_state(2, rng));
    const int j = 7;
    Matrix expected;
    if (vopt.inject_kraus_fault) {
      BondChannel ch;
      ch.kraus = {tensor.site_matrix(0), tensor.site_matrix(1)};  // wrong: V instead of V^T
      ch.transfer = kron(ch.kraus[0], ch.kraus[0].conjugate()) + kron(ch.kraus[1], ch.kraus[1].conjugate());
      expected = iterate_channel(ch, boundary.density(), j);
    } else {
      expected = iterate_channel(bond_channel(tensor), boundary.density(), j);
    }
    const Circuit c = build_state_prep_circuit(IterationBlock(u), boundary_prep(boundary), j, Purpose::kEnergy);
    const double err = (simulate_exact(c).bond_rho - expected).norm();
    check("channel_consistency", err, 1e-12, err <= 1e-12);
  });

  guarded("deferred_measurement", [&] {
    const UnitaryGate u(random_unitary(8, rng));
    const BoundaryState boundary(random_state(4, rng));
    Circuit c = build_state_prep_circuit(IterationBlock(u), boundary_prep(boundary), 6, Purpose::kEnergy);
    Circuit stripped = c;
    std::erase_if(stripped.ops, [](const CircuitOp& o) { return o.type == OpType::kMeasure; });
    const double err = (simulate_exact(c).bond_rho - simulate_exact(stripped).bond_rho).norm();
    check("deferred_measurement", err, 1e-12, err <= 1e-12);
  });

  const OptimizeResult opt1 = pc.get(1.2, 1, OptimizeMode::kAnsatz);
  const ChannelSpectrum sp1 = transfer_spectrum(bond_channel(opt1.tensor));
  const IterationBlock block1(compile_ansatz(opt1.params));
  const BoundaryPrep prep1 = boundary_prep(select_boundary(sp1).boundary);
  const int j1 = burn_in_length(sp1, cfg.burn_in_tol);

  guarded("fold_identity", [&] {
    double worst = 0;
    std::vector<Circuit> set{build_state_prep_circuit(block1, prep1, j1 + 3, Purpose::kEnergy)};
    for (const auto& c : build_tomography_circuits(block1, prep1, j1, false)) set.push_back(c);
    for (const auto& c : set) {
      const auto a = simulate_exact(c), b = simulate_exact(fold_circuit(c));
      worst = std::max(worst, (a.bond_rho - b.bond_rho).norm());
      for (const auto& [k, v] : a.marginals) worst = std::max(worst, std::abs(v - b.marginals.at(k)));
      for (const auto& [k, v] : a.pair_products) worst = std::max(worst, std::abs(v - b.pair_products.at(k)));
    }
    check("fold_identity", worst, 1e-12, worst <= 1e-12);
  });

  guarded("fixed_point_spectrum", [&] {
    const auto fixed = entanglement_entropy(sp1.fixed_point).schmidt_spectrum;
    const auto iterated = half_chain_entropy(opt1.tensor, prep1.target_state, 400).schmidt_spectrum;
    double err = 0;
    for (std::size_t i = 0; i < fixed.size(); ++i) err = std::max(err, std::abs(fixed[i] - iterated[i]));
    check("fixed_point_spectrum", err, 1e-10, err <= 1e-10);
  });

  guarded("zne_quadratic_scaling", [&] {
    const double s0 = half_chain_entropy(opt1.tensor, prep1.target_state, j1).entropy_bits;
    const auto circuits = build_tomography_circuits(block1, prep1, j1, false);
    double bias[2];
    const double p2s[2] = {0.008, 0.004};
    for (int k = 0; k < 2; ++k) {
      NoiseModel nm;
      nm.p2 = p2s[k];
      Tomogram tb, tf;
      for (const auto& c : circuits) {
        tb.counts[c.metadata.setting] = exact_outcome_probabilities(simulate_exact(c, nm), 1);
        tf.counts[c.metadata.setting] = exact_outcome_probabilities(simulate_exact(fold_circuit(c), nm), 1);
      }
      bias[k] = std::abs(entropy_with_ci(tb, &tf, 100, 0).entropy - s0);
    }
    const double ratio = bias[0] / bias[1];
    check("zne_quadratic_scaling", ratio, 0.3, std::abs(ratio - 4.0) <= 1.2, "bias ratio p2=0.008 / p2=0.004");
  });

  guarded("native_compilation", [&] {
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const UnitaryGate u(random_unitary(4, rng));
      worst = std::max(worst, phase_distance(decompose_to_native(u).matrix(), u.matrix));
    }
    check("native_compilation", worst, 1e-8, worst <= 1e-8);
  });

  guarded("depolarize_composition", [&] {
    const Matrix rho = random_state(4, rng) * random_state(4, rng).adjoint();
    const Matrix r = hermitian_part(rho / rho.trace());
    const double p = 0.008;
    const Matrix twice = depolarize(depolarize(r, {0}, p), {0}, p);
    const double err = (twice - depolarize(r, {0}, 2 * p - p * p)).norm();
    check("depolarize_composition", err, 1e-12, err <= 1e-12);
  });

  if (vopt.include_chi4) {
    guarded("tomography_equivalence", [&] {
      const OptimizeResult opt2 = pc.get(1.05, 2, OptimizeMode::kAnsatz);
      const ChannelSpectrum sp2 = transfer_spectrum(bond_channel(opt2.tensor));
      const IterationBlock block2(compile_ansatz(opt2.params));
      const BoundaryPrep prep2 = boundary_prep(select_boundary(sp2).boundary);
      const int j2 = burn_in_length(sp2, cfg.burn_in_tol);
      Tomogram full, restricted;
      full.n_b = restricted.n_b = 2;
      for (const auto& c : build_tomography_circuits(block2, prep2, j2, false))
        full.counts[c.metadata.setting] = exact_outcome_probabilities(simulate_exact(c), 2);
      for (const auto& c : build_tomography_circuits(block2, prep2, j2, true))
        restricted.counts[c.metadata.setting] = exact_outcome_probabilities(simulate_exact(c), 2);
      const double d = trace_distance(reconstruct_2q(full, false).rho, reconstruct_2q(restricted, true).rho);
      check("tomography_equivalence", d, 1e-10, d <= 1e-10);
    });
  }
  return rep;
}

}  // namespace qmps
