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

// qmps command line: optimize, oracle, energy-sweep, entropy-sweep, validate.
// Exit codes: 0 success, 1 validation failure (or failed sweep points), 2 configuration error.

#include "qmps/qmps.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace qmps;

struct GridFlags {
  double lambda_min = NAN;
  double lambda_max = NAN;
  int steps = 0;
  std::vector<double> lambda_list;

  void add(CLI::App* app) {
    app->add_option("--lambda-min", lambda_min, "First grid point");
    app->add_option("--lambda-max", lambda_max, "Last grid point");
    app->add_option("--steps", steps, "Number of grid points (inclusive of both ends)");
    app->add_option("--lambda-list", lambda_list, "Explicit comma-separated grid")->delimiter(',');
  }

  std::vector<double> grid(const std::vector<double>& fallback) const {
    if (!lambda_list.empty()) {
      if (!std::isnan(lambda_min) || !std::isnan(lambda_max) || steps) throw Error("--lambda-list excludes --lambda-min/--lambda-max/--steps");
      return lambda_list;
    }
    if (std::isnan(lambda_min) && std::isnan(lambda_max) && !steps) return fallback;
    if (std::isnan(lambda_min) || std::isnan(lambda_max) || steps < 1)
      throw Error("--lambda-min, --lambda-max and --steps must be given together");
    return linear_grid(lambda_min, lambda_max, steps);
  }
};

struct CommonFlags {
  GridFlags grid;
  int n_b = 1;
  std::uint64_t seed = 2024;
  std::string format = "csv";
  std::string out;
  std::string param_cache;
  std::string mode = "ansatz";

  void add(CLI::App* app) {
    grid.add(app);
    app->add_option("--nb", n_b, "Bond qubits (1 or 2)");
    app->add_option("--seed", seed, "Root seed");
    app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--out", out, "Output file (default: stdout)");
    app->add_option("--param-cache", param_cache, "JSON cache of optimized parameters");
    app->add_option("--mode", mode, "Optimization mode: ansatz or full")->check(CLI::IsMember({"ansatz", "full"}));
  }
};

struct NoiseFlags {
  std::string profile;
  std::optional<double> p2, p1, p_leak, eps_meas, eps_reset;

  void add(CLI::App* app) {
    app->add_option("--noise-profile", profile, "JSON noise profile, or 'default' for the built-in error budget");
    app->add_option("--p2", p2, "Two-qubit depolarizing probability per U_zz");
    app->add_option("--p1", p1, "Single-qubit depolarizing probability");
    app->add_option("--pleak", p_leak, "Leakage probability per qubit per U_zz");
    app->add_option("--eps-meas", eps_meas, "Bond depolarizing per system measurement");
    app->add_option("--eps-reset", eps_reset, "Bond depolarizing per system reset");
  }

  NoiseModel model() const {
    NoiseModel n;
    if (profile == "default")
      n = NoiseModel::default_profile();
    else if (!profile.empty())
      n = noise_from_json(read_json_file(profile));
    if (p2) n.p2 = *p2;
    if (p1) n.p1 = *p1;
    if (p_leak) n.p_leak = *p_leak;
    if (eps_meas) n.eps_meas = *eps_meas;
    if (eps_reset) n.eps_reset = *eps_reset;
    n.validate();
    return n;
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

std::string csv_or_json(const std::string& format, const std::string& csv, const json& j) {
  return format == "json" ? j.dump(1) + "\n" : csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential quantum-circuit MPS for the transverse-field Ising chain"};
  app.require_subcommand(1);

  CommonFlags opt_flags;
  int restarts = 8;
  auto* optimize = app.add_subcommand("optimize", "Variationally optimize the circuit MPS");
  opt_flags.add(optimize);
  optimize->add_option("--restarts", restarts, "Random restarts");

  CommonFlags oracle_flags;
  bool with_entropy = false;
  auto* oracle = app.add_subcommand("oracle", "Exact energy density and high bond-dimension entropy");
  oracle_flags.add(oracle);
  oracle->add_flag("--entropy", with_entropy, "Also compute the half-chain entropy reference");

  CommonFlags energy_flags;
  NoiseFlags energy_noise;
  SweepConfig energy_cfg;
  auto* energy = app.add_subcommand("energy-sweep", "Sampled energy estimates over a lambda grid");
  energy_flags.add(energy);
  energy_noise.add(energy);
  energy->add_option("--shots", energy_cfg.shots, "Shots per circuit");
  energy->add_flag("--zne", energy_cfg.zne, "Zero-noise extrapolation with folded circuits");
  energy->add_flag("--postselect", energy_cfg.postselect, "Discard shots flagged by the leakage check");
  energy->add_option("--burn-in-tol", energy_cfg.burn_in_tol, "Transient tolerance for the burn-in length");

  CommonFlags entropy_flags;
  NoiseFlags entropy_noise;
  SweepConfig entropy_cfg;
  bool no_oracle = false;
  auto* entropy = app.add_subcommand("entropy-sweep", "Bond-register tomography and entropy over a lambda grid");
  entropy_flags.add(entropy);
  entropy_noise.add(entropy);
  entropy->add_option("--shots", entropy_cfg.shots, "Shots per tomography setting");
  entropy->add_flag("--zne", entropy_cfg.zne, "Zero-noise extrapolation with folded circuits");
  entropy->add_flag("--postselect", entropy_cfg.postselect, "Discard shots flagged by the leakage check");
  entropy->add_flag("--restricted-tomo", entropy_cfg.restricted_tomography, "Three-setting symmetric tomography (nb=2)");
  entropy->add_option("--burn-in-tol", entropy_cfg.burn_in_tol, "Transient tolerance for the burn-in length");
  entropy->add_option("--bootstrap", entropy_cfg.bootstrap_b, "Bootstrap resamples");
  entropy->add_flag("--no-oracle", no_oracle, "Skip the high bond-dimension entropy column");

  std::uint64_t validate_seed = 2024;
  std::string validate_out;
  bool inject_fault = false, skip_chi4 = false;
  auto* validate = app.add_subcommand("validate", "Run the cross-module invariant suite");
  validate->add_option("--seed", validate_seed, "Root seed");
  validate->add_option("--out", validate_out, "Report file (default: stdout)");
  validate->add_flag("--inject-fault", inject_fault, "Negative control: break the Kraus convention");
  validate->add_flag("--skip-chi4", skip_chi4, "Skip checks that need a chi = 4 optimization");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*optimize) {
      const auto grid = opt_flags.grid.grid(linear_grid(0.0, 2.0, 11));
      if (opt_flags.n_b != 1 && opt_flags.n_b != 2) throw Error("--nb must be 1 or 2");
      OptimizerConfig oc;
      oc.restarts = restarts;
      oc.seed = opt_flags.seed;
      const OptimizeMode mode = optimize_mode_from_string(opt_flags.mode);
      ParameterCache cache(opt_flags.param_cache);
      std::ostringstream csv;
      csv << "lambda,n_b,mode,energy,e_exact,gap,parameters\n";
      json arr = json::array();
      for (double l : grid) {
        const auto r = cache.get(l, opt_flags.n_b, mode, oc);
        const double ex = exact_energy_density(TFIMParams(l)).energy_density;
        std::vector<double> x(r.parameters.data(), r.parameters.data() + r.parameters.size());
        csv << format_number(l) << ',' << opt_flags.n_b << ',' << to_string(mode) << ',' << format_number(r.energy) << ','
            << format_number(ex) << ',' << format_number(r.energy - ex) << ',';
        for (std::size_t i = 0; i < x.size(); ++i) csv << (i ? ";" : "") << format_number(x[i]);
        csv << '\n';
        arr.push_back({{"lambda", l}, {"n_b", opt_flags.n_b}, {"mode", to_string(mode)}, {"energy", r.energy},
                       {"e_exact", ex}, {"parameters", x}});
      }
      cache.save();
      emit(csv_or_json(opt_flags.format, csv.str(), arr), opt_flags.out);
      return 0;
    }
    if (*oracle) {
      const auto grid = oracle_flags.grid.grid(linear_grid(0.0, 2.0, 11));
      std::ostringstream csv;
      csv << "lambda,e_exact" << (with_entropy ? ",entropy,entropy_converged" : "") << '\n';
      json arr = json::array();
      for (double l : grid) {
        const double e = exact_energy_density(TFIMParams(l)).energy_density;
        json row{{"lambda", l}, {"e_exact", e}};
        csv << format_number(l) << ',' << format_number(e);
        if (with_entropy) {
          if (std::abs(l - 1.0) < 1e-12) {
            csv << ",nan,0";
            row["entropy"] = nullptr;
          } else {
            const auto o = exact_half_chain_entropy(TFIMParams(l));
            csv << ',' << format_number(o.entropy_bits) << ',' << (o.converged ? 1 : 0);
            row["entropy"] = o.entropy_bits;
            row["entropy_converged"] = o.converged;
          }
        }
        csv << '\n';
        arr.push_back(row);
      }
      emit(csv_or_json(oracle_flags.format, csv.str(), arr), oracle_flags.out);
      return 0;
    }
    auto fill = [](SweepConfig& cfg, const CommonFlags& f, const NoiseFlags& nf, const std::vector<double>& fallback) {
      cfg.lambda_grid = f.grid.grid(fallback);
      cfg.n_b = f.n_b;
      cfg.seed = f.seed;
      cfg.noise = nf.model();
      cfg.mode = optimize_mode_from_string(f.mode);
      cfg.param_cache = f.param_cache;
      cfg.output_path = f.out;
      cfg.format = f.format == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
      cfg.validate();
    };
    if (*energy) {
      fill(energy_cfg, energy_flags, energy_noise, linear_grid(0.0, 2.0, 11));
      const auto rows = run_energy_sweep(energy_cfg);
      emit(csv_or_json(energy_flags.format, energy_table_csv(rows, energy_cfg.zne), energy_table_json(rows, energy_cfg.zne)),
           energy_flags.out);
      return std::all_of(rows.begin(), rows.end(), [](const EnergyRow& r) { return r.ok; }) ? 0 : 1;
    }
    if (*entropy) {
      const auto fallback = entropy_flags.n_b == 2 ? std::vector<double>{1.01, 1.05, 1.1, 1.15, 1.2} : linear_grid(0.2, 2.0, 10);
      entropy_cfg.oracle_entropy = !no_oracle;
      fill(entropy_cfg, entropy_flags, entropy_noise, fallback);
      const auto rows = run_entropy_sweep(entropy_cfg);
      emit(csv_or_json(entropy_flags.format, entropy_table_csv(rows, entropy_cfg.zne),
                       entropy_table_json(rows, entropy_cfg.zne)),
           entropy_flags.out);
      return std::all_of(rows.begin(), rows.end(), [](const EntropyRow& r) { return r.ok; }) ? 0 : 1;
    }
    if (*validate) {
      SweepConfig cfg;
      cfg.seed = validate_seed;
      ValidationOptions vo;
      vo.inject_kraus_fault = inject_fault;
      vo.include_chi4 = !skip_chi4;
      const auto report = run_validation(cfg, vo);
      emit(report.to_json().dump(1) + "\n", validate_out);
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "qmps: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
