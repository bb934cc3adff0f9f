// Copyright 2026 The pdpmf Authors
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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdpmf/errors.hpp"
#include "pdpmf/experiment.hpp"

namespace {

using namespace pdpmf;

// All scalar settings of the `run` subcommand, in one bag so the layering
// (defaults < preset < config file < command line) is explicit.
struct RunSettings {
  std::string dataset = "synth";
  std::string format = "auto";
  std::string preset;
  std::string mode = "plain";
  double epsilon = 0.1;
  double fc = 0.54, fm = 0.37;
  double eps_c = 0.1, eps_m = 0.2, eps_l = 1.0;
  std::string policy = "mean";
  double t_value = 0.0;
  std::string sweep = "none";
  std::string sweep_values;
  std::string dp_baseline = "off";  // "off" or an epsilon value
  int seeds = 5;
  int folds = 10;
  std::uint64_t seed = 42;
  std::string out;
  int jobs = 1;
  bool save_models = false;
  int d = 20;
  double gamma = 50.0;
  double lambda_u = 0.01, lambda_v = 0.01;
  int k1 = 50, k2 = 50;
  std::string sens = "add_remove";
  std::string noise_mode = "fixed";
  std::string normalize_step = "on";
  std::string project_each_sweep = "on";
  int synth_users = 943, synth_items = 1682;
  long long synth_entries = 100000;
  std::uint64_t synth_seed = 99;
};

std::vector<double> parse_value_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

bool parse_on_off(const std::string& v, const std::string& flag) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError(flag + " must be on or off, got '" + v + "'");
}

MovielensFormat resolve_format(const std::string& format, const std::string& path) {
  if (format == "tsv") return MovielensFormat::kTabSeparated;
  if (format == "ml1m") return MovielensFormat::kDoubleColon;
  if (format != "auto") throw ConfigError("unknown format: " + format);
  std::ifstream in(path);
  std::string line;
  if (in && std::getline(in, line) && line.find("::") != std::string::npos)
    return MovielensFormat::kDoubleColon;
  return MovielensFormat::kTabSeparated;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key=value");
    std::string key = line.substr(start, eq - start);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    trim(key);
    trim(value);
    kv[key] = value;
  }
  return kv;
}

void apply_setting(RunSettings& s, const std::string& key, const std::string& value) {
  if (key == "dataset") s.dataset = value;
  else if (key == "format") s.format = value;
  else if (key == "preset") s.preset = value;
  else if (key == "mode") s.mode = value;
  else if (key == "epsilon") s.epsilon = std::stod(value);
  else if (key == "fc") s.fc = std::stod(value);
  else if (key == "fm") s.fm = std::stod(value);
  else if (key == "eps-c") s.eps_c = std::stod(value);
  else if (key == "eps-m") s.eps_m = std::stod(value);
  else if (key == "eps-l") s.eps_l = std::stod(value);
  else if (key == "policy") s.policy = value;
  else if (key == "t") s.t_value = std::stod(value);
  else if (key == "sweep") s.sweep = value;
  else if (key == "sweep-values") s.sweep_values = value;
  else if (key == "dp-baseline") s.dp_baseline = value;
  else if (key == "seeds") s.seeds = std::stoi(value);
  else if (key == "folds") s.folds = std::stoi(value);
  else if (key == "seed") s.seed = std::stoull(value);
  else if (key == "out") s.out = value;
  else if (key == "jobs") s.jobs = std::stoi(value);
  else if (key == "save-models") s.save_models = parse_on_off(value, key);
  else if (key == "d") s.d = std::stoi(value);
  else if (key == "gamma") s.gamma = std::stod(value);
  else if (key == "lambda-u") s.lambda_u = std::stod(value);
  else if (key == "lambda-v") s.lambda_v = std::stod(value);
  else if (key == "k1") s.k1 = std::stoi(value);
  else if (key == "k2") s.k2 = std::stoi(value);
  else if (key == "sens") s.sens = value;
  else if (key == "noise-mode") s.noise_mode = value;
  else if (key == "normalize-step") s.normalize_step = value;
  else if (key == "project-each-sweep") s.project_each_sweep = value;
  else if (key == "synth-users") s.synth_users = std::stoi(value);
  else if (key == "synth-items") s.synth_items = std::stoi(value);
  else if (key == "synth-entries") s.synth_entries = std::stoll(value);
  else if (key == "synth-seed") s.synth_seed = std::stoull(value);
  else throw ConfigError("unknown config key: " + key);
}

ExperimentPlan settings_to_plan(const RunSettings& s) {
  ExperimentPlan plan;

  if (s.dataset != "synth") {
    plan.dataset.path = s.dataset;
    plan.dataset.format = resolve_format(s.format, s.dataset);
  }
  plan.dataset.synth_users = s.synth_users;
  plan.dataset.synth_items = s.synth_items;
  plan.dataset.synth_entries = s.synth_entries;
  plan.dataset.synth_seed = s.synth_seed;

  GroupSpecParams params;
  params.f_c = s.fc;
  params.f_m = s.fm;
  params.eps_c = s.eps_c;
  params.eps_m = s.eps_m;
  params.eps_l = s.eps_l;
  ThresholdPolicy policy;
  if (s.policy == "mean") policy = ThresholdPolicy::mean();
  else if (s.policy == "max") policy = ThresholdPolicy::max();
  else if (s.policy == "fixed") policy = ThresholdPolicy::fixed(s.t_value);
  else throw ConfigError("unknown threshold policy: " + s.policy);

  if (s.mode == "plain") plan.mode = RunMode::plain();
  else if (s.mode == "dp") plan.mode = RunMode::dp(s.epsilon);
  else if (s.mode == "pdp") plan.mode = RunMode::pdp(params, policy);
  else throw ConfigError("unknown mode: " + s.mode);

  if (s.sens == "add_remove") plan.mode.smode = SensitivityMode::kAddRemove;
  else if (s.sens == "modify") plan.mode.smode = SensitivityMode::kModify;
  else throw ConfigError("unknown sensitivity mode: " + s.sens);
  if (s.noise_mode == "fixed") plan.mode.nmode = NoiseMode::kFixedObjective;
  else if (s.noise_mode == "per_iteration") plan.mode.nmode = NoiseMode::kPerIteration;
  else throw ConfigError("unknown noise mode: " + s.noise_mode);

  if (s.sweep == "none") plan.sweep = SweepVariable::kNone;
  else if (s.sweep == "fc") plan.sweep = SweepVariable::kConservativeFraction;
  else if (s.sweep == "em") plan.sweep = SweepVariable::kModerateEpsilon;
  else if (s.sweep == "t") plan.sweep = SweepVariable::kThreshold;
  else if (s.sweep == "eps") plan.sweep = SweepVariable::kEpsilon;
  else throw ConfigError("unknown sweep variable: " + s.sweep);
  plan.sweep_values = parse_value_list(s.sweep_values);

  if (s.dp_baseline != "off" && !s.dp_baseline.empty()) {
    plan.dp_baseline = true;
    plan.dp_baseline_epsilon = std::stod(s.dp_baseline);
  }

  plan.replications = s.seeds;
  plan.folds = s.folds;
  plan.master_seed = s.seed;
  plan.out_dir = s.out;
  plan.jobs = s.jobs;
  plan.save_models = s.save_models;

  plan.train.d = s.d;
  plan.train.gamma = s.gamma;
  plan.train.lambda_u = s.lambda_u;
  plan.train.lambda_v = s.lambda_v;
  plan.train.k1 = s.k1;
  plan.train.k2 = s.k2;
  plan.train.normalize_step = parse_on_off(s.normalize_step, "normalize-step");
  plan.train.project_each_sweep = parse_on_off(s.project_each_sweep, "project-each-sweep");
  return plan;
}

int cmd_run(const RunSettings& cli, const std::vector<std::string>& cli_keys,
            const std::string& config_path) {
  RunSettings s;  // layer 1: built-in defaults

  // Layer 2: preset (named on the command line or in the config file).
  std::map<std::string, std::string> file_kv;
  if (!config_path.empty()) file_kv = read_config_file(config_path);
  std::string preset = cli.preset;
  if (preset.empty() && file_kv.count("preset")) preset = file_kv.at("preset");

  ExperimentPlan preset_plan;
  bool have_preset = !preset.empty();
  if (have_preset) apply_preset(preset_plan, preset);

  if (have_preset) {
    s.mode = "pdp";
    s.fc = preset_plan.mode.spec_params.f_c;
    s.fm = preset_plan.mode.spec_params.f_m;
    s.eps_c = preset_plan.mode.spec_params.eps_c;
    s.eps_m = preset_plan.mode.spec_params.eps_m;
    s.eps_l = preset_plan.mode.spec_params.eps_l;
    s.sweep = sweep_variable_name(preset_plan.sweep);
    std::string vals;
    for (double v : preset_plan.sweep_values) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", v);
      vals += (vals.empty() ? "" : ",") + std::string(buf);
    }
    s.sweep_values = vals;
    if (preset_plan.dp_baseline) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", preset_plan.dp_baseline_epsilon);
      s.dp_baseline = buf;
    }
    s.preset = preset;
  }

  // Layer 3: config file.
  for (const auto& [k, v] : file_kv) {
    if (k == "preset") continue;
    apply_setting(s, k, v);
  }

  // Layer 4: options actually given on the command line.
  for (const std::string& k : cli_keys) {
    if (k == "dataset") s.dataset = cli.dataset;
    else if (k == "format") s.format = cli.format;
    else if (k == "mode") s.mode = cli.mode;
    else if (k == "epsilon") s.epsilon = cli.epsilon;
    else if (k == "fc") s.fc = cli.fc;
    else if (k == "fm") s.fm = cli.fm;
    else if (k == "eps-c") s.eps_c = cli.eps_c;
    else if (k == "eps-m") s.eps_m = cli.eps_m;
    else if (k == "eps-l") s.eps_l = cli.eps_l;
    else if (k == "policy") s.policy = cli.policy;
    else if (k == "t") s.t_value = cli.t_value;
    else if (k == "sweep") s.sweep = cli.sweep;
    else if (k == "sweep-values") s.sweep_values = cli.sweep_values;
    else if (k == "dp-baseline") s.dp_baseline = cli.dp_baseline;
    else if (k == "seeds") s.seeds = cli.seeds;
    else if (k == "folds") s.folds = cli.folds;
    else if (k == "seed") s.seed = cli.seed;
    else if (k == "out") s.out = cli.out;
    else if (k == "jobs") s.jobs = cli.jobs;
    else if (k == "save-models") s.save_models = cli.save_models;
    else if (k == "d") s.d = cli.d;
    else if (k == "gamma") s.gamma = cli.gamma;
    else if (k == "lambda-u") s.lambda_u = cli.lambda_u;
    else if (k == "lambda-v") s.lambda_v = cli.lambda_v;
    else if (k == "k1") s.k1 = cli.k1;
    else if (k == "k2") s.k2 = cli.k2;
    else if (k == "sens") s.sens = cli.sens;
    else if (k == "noise-mode") s.noise_mode = cli.noise_mode;
    else if (k == "normalize-step") s.normalize_step = cli.normalize_step;
    else if (k == "project-each-sweep") s.project_each_sweep = cli.project_each_sweep;
    else if (k == "synth-users") s.synth_users = cli.synth_users;
    else if (k == "synth-items") s.synth_items = cli.synth_items;
    else if (k == "synth-entries") s.synth_entries = cli.synth_entries;
    else if (k == "synth-seed") s.synth_seed = cli.synth_seed;
  }

  if (s.out.empty()) {
    const char* env = std::getenv("PDPMF_OUT_DIR");
    s.out = env && *env ? env : "results";
  }

  ExperimentPlan plan = settings_to_plan(s);
  plan.preset = s.preset;
  int failed = run_experiment(plan);
  if (failed > 0) {
    std::cerr << failed << " grid cell(s) failed\n";
    return 1;
  }
  std::cout << "results written to " << plan.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving probabilistic matrix factorization experiments"};
  app.set_version_flag("--version", std::string("pdpmf ") + pdpmf::kVersion);
  app.require_subcommand(0, 1);
  // Repeated options override each other (last one wins), so wrappers can
  // append overrides to a base command line.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run an experiment grid");
  RunSettings rs;
  std::string config_path;
  run->add_option("--dataset", rs.dataset,
                  "Ratings file, or 'synth' for the built-in benchmark");
  run->add_option("--format", rs.format, "Dataset format: auto|tsv|ml1m");
  run->add_option("--preset", rs.preset, "Canned grid: fig2|fig3|fig4|fig5");
  run->add_option("--config", config_path, "Flat key=value config file");
  run->add_option("--mode", rs.mode, "Scheme: plain|dp|pdp");
  run->add_option("--epsilon", rs.epsilon, "Uniform privacy budget (dp mode)");
  run->add_option("--fc", rs.fc, "Conservative fraction");
  run->add_option("--fm", rs.fm, "Moderate fraction");
  run->add_option("--eps-c", rs.eps_c, "Conservative budget lower bound");
  run->add_option("--eps-m", rs.eps_m, "Conservative/moderate breakpoint");
  run->add_option("--eps-l", rs.eps_l, "Liberal budget");
  run->add_option("--policy", rs.policy, "Threshold policy: mean|max|fixed");
  run->add_option("--t", rs.t_value, "Threshold value for --policy fixed");
  run->add_option("--sweep", rs.sweep, "Sweep variable: none|fc|em|t|eps");
  run->add_option("--sweep-values", rs.sweep_values, "Comma-separated sweep values");
  run->add_option("--dp-baseline", rs.dp_baseline,
                  "Run a uniform-DP baseline alongside: off or an epsilon");
  run->add_option("--seeds", rs.seeds, "Replications (independent master seeds)");
  run->add_option("--folds", rs.folds, "Cross-validation folds");
  run->add_option("--seed", rs.seed, "Master seed");
  run->add_option("--out", rs.out, "Output directory (default $PDPMF_OUT_DIR or results/)");
  run->add_option("--jobs", rs.jobs, "Concurrent grid cells");
  run->add_flag("--save-models", rs.save_models, "Also train and save one model per cell");
  run->add_option("--d", rs.d, "Latent dimension");
  run->add_option("--gamma", rs.gamma, "Learning rate");
  run->add_option("--lambda-u", rs.lambda_u, "User regularization");
  run->add_option("--lambda-v", rs.lambda_v, "Item regularization");
  run->add_option("--k1", rs.k1, "Phase-1 sweeps");
  run->add_option("--k2", rs.k2, "Phase-2 sweeps");
  run->add_option("--sens", rs.sens, "Sensitivity: add_remove|modify");
  run->add_option("--noise-mode", rs.noise_mode, "Noise draws: fixed|per_iteration");
  run->add_option("--normalize-step", rs.normalize_step,
                  "Scale the sweep step by 1/|ratings|: on|off");
  run->add_option("--project-each-sweep", rs.project_each_sweep,
                  "Project user profiles onto the unit ball every sweep: on|off");
  run->add_option("--synth-users", rs.synth_users, "Benchmark users");
  run->add_option("--synth-items", rs.synth_items, "Benchmark items");
  run->add_option("--synth-entries", rs.synth_entries, "Benchmark ratings");
  run->add_option("--synth-seed", rs.synth_seed, "Benchmark generator seed");

  // --- export ------------------------------------------------------------
  auto* exp = app.add_subcommand("export", "Export publishable profiles of a saved model");
  std::string model_file, export_out = "export";
  bool include_user = false;
  exp->add_option("--model", model_file, "Saved model file")->required();
  exp->add_option("--out", export_out, "Output directory");
  exp->add_flag("--include-user-profiles", include_user,
                "Also export user profiles (plain models only)");

  // --- spec-gen ----------------------------------------------------------
  auto* sg = app.add_subcommand("spec-gen", "Generate a privacy specification CSV");
  RunSettings ss;
  std::string spec_out = "privacy_spec.csv";
  sg->add_option("--dataset", ss.dataset, "Ratings file, or 'synth'");
  sg->add_option("--format", ss.format, "Dataset format: auto|tsv|ml1m");
  sg->add_option("--fc", ss.fc, "Conservative fraction");
  sg->add_option("--fm", ss.fm, "Moderate fraction");
  sg->add_option("--eps-c", ss.eps_c, "Conservative budget lower bound");
  sg->add_option("--eps-m", ss.eps_m, "Conservative/moderate breakpoint");
  sg->add_option("--eps-l", ss.eps_l, "Liberal budget");
  sg->add_option("--seed", ss.seed, "Generator seed");
  sg->add_option("--out", spec_out, "Output CSV path");
  sg->add_option("--synth-users", ss.synth_users, "Benchmark users");
  sg->add_option("--synth-items", ss.synth_items, "Benchmark items");
  sg->add_option("--synth-entries", ss.synth_entries, "Benchmark ratings");
  sg->add_option("--synth-seed", ss.synth_seed, "Benchmark generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::vector<std::string> given;
      for (const auto* opt : run->get_options()) {
        if (opt->count() > 0 && opt->get_lnames().size() > 0) {
          const std::string& name = opt->get_lnames()[0];
          if (name != "preset" && name != "config") given.push_back(name);
        }
      }
      return cmd_run(rs, given, config_path);
    }
    if (exp->parsed()) {
      pdpmf::export_model(model_file, export_out, include_user);
      std::cout << "exported to " << export_out << "\n";
      return 0;
    }
    if (sg->parsed()) {
      using namespace pdpmf;
      DatasetSpec dspec;
      if (ss.dataset != "synth") {
        dspec.path = ss.dataset;
        dspec.format = resolve_format(ss.format, ss.dataset);
      }
      dspec.synth_users = ss.synth_users;
      dspec.synth_items = ss.synth_items;
      dspec.synth_entries = ss.synth_entries;
      dspec.synth_seed = ss.synth_seed;
      SparseRatings data = load_dataset(dspec);
      GroupSpecParams params;
      params.f_c = ss.fc;
      params.f_m = ss.fm;
      params.eps_c = ss.eps_c;
      params.eps_m = ss.eps_m;
      params.eps_l = ss.eps_l;
      params.seed = ss.seed;
      PrivacySpecification spec = generate_spec(data, params);
      save_spec(spec_out, data, spec);
      std::cout << "privacy spec written to " << spec_out << "\n";
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
