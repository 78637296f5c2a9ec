// Copyright 2026 The biastomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biastomo/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace biastomo::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kDefaultWignerStateDim = 40;
constexpr const char* kParityKernel = "rho = 2 int d^2gamma W(gamma) D(gamma) (-1)^n D(gamma)^dag";

int get_int(const Json& config, const char* key, int fallback) {
  if (!config.contains(key)) return fallback;
  const auto& v = config.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string(key) + ": expected an integer");
  return v.get<int>();
}

std::int64_t get_int64(const Json& config, const char* key, std::int64_t fallback) {
  if (!config.contains(key)) return fallback;
  const auto& v = config.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string(key) + ": expected an integer");
  return v.get<std::int64_t>();
}

double get_real(const Json& config, const char* key, double fallback) {
  if (!config.contains(key)) return fallback;
  const auto& v = config.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + ": expected a number");
  return v.get<double>();
}

bool get_bool(const Json& config, const char* key, bool fallback) {
  if (!config.contains(key)) return fallback;
  const auto& v = config.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string(key) + ": expected true or false");
  return v.get<bool>();
}

const Json& section(const Json& config, const char* key) {
  static const Json kEmpty = Json::object();
  if (!config.contains(key)) return kEmpty;
  if (!config.at(key).is_object()) throw ConfigError(std::string(key) + ": expected an object");
  return config.at(key);
}

const Json& required(const Json& config, const char* key) {
  if (!config.contains(key)) throw ConfigError(std::string("missing \"") + key + "\"");
  return config.at(key);
}

std::uint64_t seed_of(const Json& config) {
  if (!config.contains("seed")) return 0;
  const auto& v = config.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError("seed: expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

int n_tr_of(const Json& config) {
  const int n_tr = get_int(config, "n_tr", 0);
  if (n_tr < 1) throw ConfigError("n_tr: expected a positive integer");
  return n_tr;
}

GWeighting weighting_of(const Json& config) {
  if (!config.contains("weighting")) return GWeighting::kUnweighted;
  const auto& v = config.at("weighting");
  if (v == "unweighted") return GWeighting::kUnweighted;
  if (v == "by_trials") return GWeighting::kByTrials;
  throw ConfigError("weighting: expected \"unweighted\" or \"by_trials\"");
}

ReconstructionConfig reconstruction_of(const Json& config) {
  const Json& s = section(config, "reconstruction");
  ReconstructionConfig rc;
  rc.max_iterations = get_int64(s, "max_iterations", rc.max_iterations);
  rc.likelihood_tolerance = get_real(s, "tolerance", rc.likelihood_tolerance);
  rc.dilution_epsilon = get_real(s, "dilution_epsilon", rc.dilution_epsilon);
  rc.max_refinement_steps = get_int64(s, "refinement_steps", rc.max_refinement_steps);
  rc.rel_threshold = get_real(config, "threshold", kDefaultRelThreshold);
  try {
    rc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("reconstruction: ") + e.what());
  }
  return rc;
}

struct Problem {
  std::vector<Setting> plan;
  DimensionPolicy policy;
  std::vector<PovmElement> elements;
};

Problem problem_of(const Json& config, const fs::path& base) {
  Problem p;
  p.plan = plan_from_spec(required(config, "plan"), base);
  p.policy = policy_for(n_tr_of(config), p.plan);
  const int n_work = get_int(config, "n_work", 0);
  if (n_work > 0) {
    p.policy.n_work = n_work;
    try {
      p.policy.validate(max_abs_gamma(p.plan));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  p.elements = build_povm(p.plan, p.policy);
  return p;
}

double total_trials(std::span<const Setting> plan) {
  double total = 0.0;
  for (const auto& s : plan) total += static_cast<double>(s.trials);
  return total;
}

Json with_meta(Json body, const std::string& command, const Json& config) {
  body["meta"] = meta_block(command, config);
  return body;
}

void write_json(const fs::path& path, const Json& value) { write_text_file(path, dump_json(value)); }

void write_manifest(const fs::path& out, const std::string& command, const Json& config,
                    const std::vector<std::string>& files, Json extra = Json::object()) {
  Json manifest = meta_block(command, config);
  Json list = Json::array();
  for (const auto& f : files) list.push_back(f);
  manifest["files"] = std::move(list);
  for (const auto& [key, value] : extra.items()) manifest[key] = value;
  write_json(out / "manifest.json", manifest);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path resolve(const fs::path& base, const Json& value, const char* what) {
  if (!value.is_string()) throw ConfigError(std::string(what) + ": expected a path");
  const fs::path p(value.get<std::string>());
  return p.is_absolute() || base.empty() ? p : base / p;
}

Eigen::VectorXd counts_for(const Json& config, const fs::path& base, const Problem& p,
                           const std::optional<DensityMatrix>& truth) {
  if (config.contains("records")) {
    const auto records = records_from_jsonl(read_text(resolve(base, config.at("records"), "records")));
    if (records.size() != p.plan.size()) throw ConfigError("records do not match the plan");
    for (std::size_t j = 0; j < records.size(); ++j) {
      if (records[j].setting_index != static_cast<std::int64_t>(j) ||
          records[j].trials != p.plan[j].trials) {
        throw ConfigError("records do not match the plan at j=" + std::to_string(j));
      }
    }
    return counts_of(records, p.plan.size());
  }
  if (!truth) throw ConfigError("reconstruct needs either \"records\" or a \"state\" to simulate");
  if (get_bool(config, "noiseless", false)) return expected_counts(*truth, p.elements);
  return counts_of(simulate_counts(*truth, p.elements, seed_of(config)), p.plan.size());
}

}  // namespace

Json effective_config(const Options& options) {
  Json config = read_json_file(options.config);
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (options.seed) config["seed"] = *options.seed;
  if (options.threshold) config["threshold"] = *options.threshold;
  return config;
}

Json meta_block(const std::string& command, const Json& config) {
  Json meta;
  meta["config_hash"] = config_hash(config);
  meta["version"] = kLibraryVersion;
  meta["command"] = command;
  return meta;
}

void cmd_transfer(const Json& config, const fs::path& base, const fs::path& out) {
  const Problem p = problem_of(config, base);
  const auto tf = build_transfer_function(p.elements, get_real(config, "threshold", kDefaultRelThreshold),
                                          weighting_of(config));
  Json report = transfer_report(tf);
  Json normalized = Json::array();
  const Eigen::VectorXd ratio = tf.normalized_spectrum();
  for (Eigen::Index i = 0; i < ratio.size(); ++i) normalized.push_back(ratio(i));
  report["normalized_eigenvalues"] = std::move(normalized);
  report["min_max_ratio"] = ratio(ratio.size() - 1);
  write_json(out / "transfer.json", with_meta(std::move(report), "transfer", config));
}

void cmd_simulate(const Json& config, const fs::path& base, const fs::path& out) {
  const Problem p = problem_of(config, base);
  const DensityMatrix truth = state_from_spec(required(config, "state"), p.policy.n_tr, base);
  if (truth.dim() != p.policy.n_tr) throw ConfigError("state dimension must equal n_tr");
  const auto records = simulate_counts(truth, p.elements, seed_of(config));
  write_text_file(out / "records.jsonl", records_to_jsonl(records));
  write_json(out / "plan.json", plan_to_json(p.plan));
  Json extra;
  extra["seed"] = seed_of(config);
  write_manifest(out, "simulate", config, {"records.jsonl", "plan.json"}, std::move(extra));
}

void cmd_reconstruct(const Json& config, const fs::path& base, const fs::path& out) {
  const Problem p = problem_of(config, base);
  const auto rc = reconstruction_of(config);
  std::optional<DensityMatrix> truth;
  if (config.contains("state")) {
    truth = state_from_spec(config.at("state"), p.policy.n_tr, base);
    if (truth->dim() != p.policy.n_tr) throw ConfigError("state dimension must equal n_tr");
  }
  const Eigen::VectorXd counts = counts_for(config, base, p, truth);
  const auto tf = build_transfer_function(p.elements, rc.rel_threshold, weighting_of(config));
  const auto result = em_reconstruct(counts, p.elements, tf, rc);

  const Json& fs_cfg = section(config, "fisher");
  const std::string at = fs_cfg.contains("at") ? fs_cfg.at("at").get<std::string>() : "estimate";
  if (at != "estimate" && at != "truth") throw ConfigError("fisher.at: expected estimate or truth");
  if (at == "truth" && !truth) throw ConfigError("fisher.at = truth needs a state");
  const double n_mes = get_real(fs_cfg, "n_mes", total_trials(p.plan));

  Json body = result_to_json(result, tf);
  body["refinement_steps"] = result.refinement_steps;
  if (truth) body["fidelity"] = fidelity(result.rho, *truth);
  body["variance"] = variance_to_json(variance_table(at == "truth" ? *truth : result.rho, p.elements, n_mes));
  write_json(out / "result.json", with_meta(std::move(body), "reconstruct", config));
}

void cmd_fisher(const Json& config, const fs::path& base, const fs::path& out) {
  const Problem p = problem_of(config, base);
  const DensityMatrix rho = state_from_spec(required(config, "state"), p.policy.n_tr, base);
  if (rho.dim() != p.policy.n_tr) throw ConfigError("state dimension must equal n_tr");
  const double n_mes = get_real(section(config, "fisher"), "n_mes", total_trials(p.plan));
  write_json(out / "variance.json",
             with_meta(variance_to_json(variance_table(rho, p.elements, n_mes)), "fisher", config));
}

void cmd_wigner(const Json& config, const fs::path& base, const fs::path& out) {
  const Json& w = section(config, "wigner");
  WignerScanConfig sc;
  if (w.contains("grid")) sc.grid = grid_from_spec(w.at("grid"));
  if (w.contains("efficiencies")) sc.efficiencies = reals_from_spec(w.at("efficiencies"), "efficiencies");
  sc.trials_per_point = get_int64(w, "trials_per_point", sc.trials_per_point);
  sc.iterations = get_int(w, "iterations", sc.iterations);
  sc.n_tr = get_int(w, "n_tr", sc.n_tr);
  sc.noiseless = get_bool(w, "noiseless", false);
  if (sc.trials_per_point < 1 || sc.iterations < 1 || sc.n_tr < 1) {
    throw ConfigError("wigner: trials_per_point, iterations and n_tr must be positive");
  }
  for (double nu : sc.efficiencies) {
    if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("wigner: efficiencies must lie in (0, 1]");
  }
  const int state_dim = std::max(get_int(w, "state_dim", kDefaultWignerStateDim), sc.n_tr);
  const DensityMatrix truth = state_from_spec(required(config, "state"), state_dim, base);

  const auto scan = run_wigner_scan(truth, sc, seed_of(config));
  write_text_file(out / "wigner.csv", wigner_csv(scan));
  write_text_file(out / "wigner_variance.csv", wigner_variance_csv(scan));
  Json diag = Json::array();
  for (Eigen::Index m = 0; m < scan.diagonals.size(); ++m) diag.push_back(scan.diagonals(m));
  write_json(out / "diagonals.json", diag);

  Json extra;
  extra["seed"] = seed_of(config);
  extra["points"] = scan.points.size();
  extra["max_abs_error"] = scan.max_abs_error();
  extra["diagonal_sum"] = scan.diagonals.sum();
  extra["quadrature_check_failed"] = scan.quadrature_check_failed;
  extra["kernel"] = kParityKernel;
  write_manifest(out, "wigner", config, {"wigner.csv", "wigner_variance.csv", "diagonals.json"},
                 std::move(extra));
}

int run(const Options& options, std::ostream& err) {
  try {
    const Json config = effective_config(options);
    const fs::path base = options.config.parent_path();
    fs::create_directories(options.out);
    if (options.command == "transfer") {
      cmd_transfer(config, base, options.out);
    } else if (options.command == "simulate") {
      cmd_simulate(config, base, options.out);
    } else if (options.command == "reconstruct") {
      cmd_reconstruct(config, base, options.out);
    } else if (options.command == "fisher") {
      cmd_fisher(config, base, options.out);
    } else if (options.command == "wigner") {
      cmd_wigner(config, base, options.out);
    } else {
      throw ConfigError("unknown command \"" + options.command + "\"");
    }
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error, out_of_range: bad input values.
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace biastomo::cli
