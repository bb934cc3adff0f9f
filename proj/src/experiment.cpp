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

#include "pdpmf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "pdpmf/errors.hpp"

namespace fs = std::filesystem;

namespace pdpmf {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    if (!out) throw Error("failed writing " + tmp);
  }
  fs::rename(tmp, path);
}

// Weighted index sampler over a fixed cumulative table.
struct CumulativeSampler {
  std::vector<double> cum;

  explicit CumulativeSampler(std::vector<double> weights) {
    double total = 0.0;
    cum.reserve(weights.size());
    for (double w : weights) {
      total += w;
      cum.push_back(total);
    }
    for (double& c : cum) c /= total;
  }

  int operator()(double u) const {
    auto it = std::lower_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    return static_cast<int>(it - cum.begin());
  }
};

}  // namespace

std::string DatasetSpec::describe() const {
  if (!synthetic()) return path;
  std::ostringstream s;
  s << "synth(" << synth_users << "x" << synth_items << "," << synth_entries
    << ",seed=" << synth_seed << ")";
  return s.str();
}

SparseRatings synth_benchmark(int users, int items, long long entries,
                              std::uint64_t seed) {
  if (users < 1 || items < 1 || entries < 1)
    throw ValidationError("degenerate benchmark dimensions");
  if (entries > static_cast<long long>(users) * items)
    throw ValidationError("more entries requested than cells available");

  // Skewed popularity, calibrated so head sizes resemble public
  // movie-rating datasets (shifted zipf).
  std::vector<double> iw(items), uw(users);
  for (int j = 0; j < items; ++j) iw[j] = std::pow(j + 26.0, -0.8);
  for (int i = 0; i < users; ++i) uw[i] = std::pow(i + 16.0, -0.7);
  {
    Rng rng(derive_seed(seed, {stream::kSynth, 1}));
    std::shuffle(iw.begin(), iw.end(), rng);
    std::shuffle(uw.begin(), uw.end(), rng);
  }
  CumulativeSampler item_pick(std::move(iw)), user_pick(std::move(uw));

  constexpr int kRank = 8;
  std::vector<double> user_bias(users), item_bias(items);
  std::vector<double> user_factor(static_cast<std::size_t>(users) * kRank);
  std::vector<double> item_factor(static_cast<std::size_t>(items) * kRank);
  {
    Rng rng(derive_seed(seed, {stream::kSynth, 2}));
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& b : user_bias) b = 0.5 * g(rng);
    for (double& b : item_bias) b = 0.35 * g(rng);
    for (double& f : user_factor) f = g(rng);
    for (double& f : item_factor) f = g(rng);
  }

  Rng rng(derive_seed(seed, {stream::kSynth, 3}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const double inter_scale = 0.6 / std::sqrt(static_cast<double>(kRank));
  auto rate = [&](int i, int j) {
    double inter = 0.0;
    for (int k = 0; k < kRank; ++k)
      inter += user_factor[static_cast<std::size_t>(i) * kRank + k] *
               item_factor[static_cast<std::size_t>(j) * kRank + k];
    double raw = 3.6 + user_bias[i] + item_bias[j] + inter_scale * inter + 0.75 * g(rng);
    return std::clamp(std::round(raw), 1.0, 5.0);
  };

  std::vector<RatingEntry> out;
  out.reserve(entries);
  const long long cells = static_cast<long long>(users) * items;
  if (entries * 2 >= cells) {
    // Near-dense request: rejection sampling would thrash, and popularity
    // skew is meaningless anyway. Take a uniform cell subset instead.
    std::vector<std::uint64_t> ids(cells);
    std::iota(ids.begin(), ids.end(), 0u);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(entries);
    std::sort(ids.begin(), ids.end());
    for (std::uint64_t c : ids) {
      int i = static_cast<int>(c / items), j = static_cast<int>(c % items);
      out.push_back({i, j, rate(i, j)});
    }
    return SparseRatings(users, items, std::move(out), 1.0, 5.0);
  }

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(entries) * 2);
  while (static_cast<long long>(out.size()) < entries) {
    int i = user_pick(unit(rng));
    int j = item_pick(unit(rng));
    std::uint64_t key = static_cast<std::uint64_t>(i) * items + j;
    if (!seen.insert(key).second) continue;
    out.push_back({i, j, rate(i, j)});
  }
  return SparseRatings(users, items, std::move(out), 1.0, 5.0);
}

SparseRatings load_dataset(const DatasetSpec& spec, IdMap* ids) {
  if (spec.synthetic()) {
    if (ids) *ids = IdMap{};
    return synth_benchmark(spec.synth_users, spec.synth_items, spec.synth_entries,
                           spec.synth_seed);
  }
  ParsedRatings parsed = parse_movielens(spec.path, spec.format);
  if (ids) *ids = std::move(parsed.ids);
  return std::move(parsed.ratings);
}

const char* sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::kNone: return "none";
    case SweepVariable::kConservativeFraction: return "fc";
    case SweepVariable::kModerateEpsilon: return "em";
    case SweepVariable::kThreshold: return "t";
    case SweepVariable::kEpsilon: return "eps";
  }
  return "?";
}

void ExperimentPlan::validate() const {
  train.validate();
  if (replications < 1) throw ValidationError("need at least one replication");
  if (folds < 2) throw ValidationError("need at least two folds");
  if (sweep != SweepVariable::kNone && sweep_values.empty())
    throw ValidationError("sweep requested without sweep values");
  if (sweep != SweepVariable::kNone && mode.kind != RunMode::Kind::kPdp &&
      sweep != SweepVariable::kEpsilon)
    throw ValidationError("privacy-specification sweeps require pdp mode");
  if (sweep == SweepVariable::kEpsilon && mode.kind != RunMode::Kind::kDp)
    throw ValidationError("epsilon sweep requires dp mode");
  for (double v : sweep_values) {
    switch (sweep) {
      case SweepVariable::kConservativeFraction:
        if (v < 0.0 || v + mode.spec_params.f_m > 1.0)
          throw ValidationError("swept f_c value " + std::to_string(v) +
                                " leaves no valid liberal fraction");
        break;
      case SweepVariable::kModerateEpsilon:
        if (!(v > mode.spec_params.eps_c) || !(v < mode.spec_params.eps_l))
          throw ValidationError("swept eps_m value " + std::to_string(v) +
                                " outside (eps_c, eps_l)");
        break;
      case SweepVariable::kThreshold:
        if (!(v > 0.0)) throw ValidationError("swept threshold must be positive");
        break;
      case SweepVariable::kEpsilon:
        if (!(v > 0.0)) throw ValidationError("swept epsilon must be positive");
        break;
      case SweepVariable::kNone:
        break;
    }
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentPlan::echo() const {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("version", kVersion);
  e.emplace_back("dataset", dataset.describe());
  e.emplace_back("mode", mode.describe());
  e.emplace_back("sweep", sweep_variable_name(sweep));
  if (!sweep_values.empty()) {
    std::string vals;
    for (double v : sweep_values) vals += (vals.empty() ? "" : " ") + format_double(v);
    e.emplace_back("sweep_values", vals);
  }
  e.emplace_back("dp_baseline", dp_baseline ? format_double(dp_baseline_epsilon) : "off");
  e.emplace_back("replications", std::to_string(replications));
  e.emplace_back("folds", std::to_string(folds));
  e.emplace_back("master_seed", std::to_string(master_seed));
  e.emplace_back("d", std::to_string(train.d));
  e.emplace_back("gamma", format_double(train.gamma));
  e.emplace_back("lambda_u", format_double(train.lambda_u));
  e.emplace_back("lambda_v", format_double(train.lambda_v));
  e.emplace_back("k1", std::to_string(train.k1));
  e.emplace_back("k2", std::to_string(train.k2));
  e.emplace_back("normalize_step", train.normalize_step ? "on" : "off");
  e.emplace_back("project_each_sweep", train.project_each_sweep ? "on" : "off");
  e.emplace_back("sensitivity", sensitivity_mode_name(mode.smode));
  e.emplace_back("noise_mode", noise_mode_name(mode.nmode));
  if (!preset.empty()) e.emplace_back("preset", preset);
  return e;
}

void apply_preset(ExperimentPlan& plan, const std::string& name) {
  GroupSpecParams params;  // f_c=0.54, f_m=0.37, eps 0.1/0.2/1.0
  if (name == "fig2") {
    plan.mode = RunMode::pdp(params, ThresholdPolicy::mean());
    plan.sweep = SweepVariable::kConservativeFraction;
    plan.sweep_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    plan.dp_baseline = true;
    plan.dp_baseline_epsilon = 0.1;
  } else if (name == "fig3") {
    plan.mode = RunMode::pdp(params, ThresholdPolicy::mean());
    plan.sweep = SweepVariable::kConservativeFraction;
    plan.sweep_values = {0.54, 0.37, 0.20};
    plan.dp_baseline = true;
    plan.dp_baseline_epsilon = 0.1;
  } else if (name == "fig4") {
    plan.mode = RunMode::pdp(params, ThresholdPolicy::mean());
    plan.sweep = SweepVariable::kModerateEpsilon;
    plan.sweep_values = {0.2, 0.4, 0.6, 0.8, 0.9};
    plan.dp_baseline = true;
    plan.dp_baseline_epsilon = 0.1;
  } else if (name == "fig5") {
    params.f_c = 0.60;
    params.f_m = 0.35;
    params.eps_m = 0.4;
    plan.mode = RunMode::pdp(params, ThresholdPolicy::mean());
    plan.sweep = SweepVariable::kThreshold;
    plan.sweep_values = {0.6, 0.7, 0.8, 1.0};
    plan.dp_baseline = false;
  } else {
    throw ConfigError("unknown preset: " + name +
                      " (available: fig2, fig3, fig4, fig5)");
  }
  plan.preset = name;
}

namespace {

RunMode mode_with_value(const RunMode& base, SweepVariable sweep, double value) {
  RunMode m = base;
  switch (sweep) {
    case SweepVariable::kNone:
      break;
    case SweepVariable::kConservativeFraction:
      m.spec_params.f_c = value;
      break;
    case SweepVariable::kModerateEpsilon:
      m.spec_params.eps_m = value;
      break;
    case SweepVariable::kThreshold:
      m.policy = ThresholdPolicy::fixed(value);
      break;
    case SweepVariable::kEpsilon:
      m.epsilon = value;
      break;
  }
  return m;
}

struct Cell {
  std::string mode_label;  // "pdp", "dp", "plain", "dp-baseline"
  double sweep_value = 0.0;
  bool has_value = false;
  int rep = 0;
  RunMode mode;
};

std::string cell_file_stem(const Cell& c) {
  std::string s = "cell_" + c.mode_label;
  if (c.has_value) s += "_v" + format_double(c.sweep_value);
  s += "_r" + std::to_string(c.rep);
  return s;
}

std::string report_to_string(const EvalReport& report,
                             const std::vector<std::pair<std::string, std::string>>& echo) {
  std::ostringstream out;
  out << "# pdpmf report\n";
  for (const auto& [k, v] : echo) out << "# " << k << "=" << v << "\n";
  for (const auto& [k, v] : report.config_echo) out << "# " << k << "=" << v << "\n";
  out << "metric,value\n";
  out << "mean_rmse," << format_double(report.mean_rmse) << "\n";
  out << "pooled_rmse," << format_double(report.pooled_rmse) << "\n";
  out << "n_test," << report.n_test << "\n";
  out << "folds," << report.folds.size() << "\n";
  out << "threshold,fraction\n";
  for (const CdfPoint& p : report.cdf)
    out << format_double(p.threshold) << "," << format_double(p.fraction) << "\n";
  return out.str();
}

std::string folds_to_string(const EvalReport& report,
                            const std::vector<std::pair<std::string, std::string>>& echo) {
  std::ostringstream out;
  out << "# pdpmf per-fold detail\n";
  for (const auto& [k, v] : echo) out << "# " << k << "=" << v << "\n";
  out << "fold,n_test,sse,rmse,threshold,train_size\n";
  for (const FoldResult& r : report.folds)
    out << r.fold << "," << r.n_test << "," << format_double(r.sse) << ","
        << format_double(r.rmse) << "," << format_double(r.threshold) << ","
        << r.train_size << "\n";
  return out.str();
}

}  // namespace

int run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  IdMap ids;
  const SparseRatings data = load_dataset(plan.dataset, &ids);
  const auto echo = plan.echo();

  // Build the grid. Cells of one replication share a seed, so schemes and
  // sweep values are compared on identical folds and random streams, and
  // adding sweep values never perturbs existing cells.
  std::vector<Cell> cells;
  const bool swept = plan.sweep != SweepVariable::kNone;
  const std::vector<double> values = swept ? plan.sweep_values : std::vector<double>{0.0};
  const char* primary_label =
      plan.mode.kind == RunMode::Kind::kPlain ? "plain"
      : plan.mode.kind == RunMode::Kind::kDp ? "dp"
                                             : "pdp";
  for (double v : values)
    for (int rep = 0; rep < plan.replications; ++rep)
      cells.push_back({primary_label, v, swept, rep, mode_with_value(plan.mode, plan.sweep, v)});
  if (plan.dp_baseline)
    for (int rep = 0; rep < plan.replications; ++rep)
      cells.push_back({"dp-baseline", 0.0, false, rep,
                       RunMode::dp(plan.dp_baseline_epsilon)});

  std::vector<EvalReport> reports(cells.size());
  std::vector<std::string> failures(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t c = next.fetch_add(1); c < cells.size(); c = next.fetch_add(1)) {
      const Cell& cell = cells[c];
      try {
        std::uint64_t rep_seed = derive_seed(
            plan.master_seed, {stream::kCell, static_cast<std::uint64_t>(cell.rep)});
        EvalReport rep = crossval_run(data, cell.mode, plan.train, plan.folds, rep_seed);
        rep.config_echo.emplace_back("cell_mode", cell.mode_label);
        if (cell.has_value)
          rep.config_echo.emplace_back("sweep_value", format_double(cell.sweep_value));
        rep.config_echo.emplace_back("replication", std::to_string(cell.rep));

        std::string stem = (fs::path(plan.out_dir) / "cells" / cell_file_stem(cell)).string();
        write_file_atomic(stem + ".csv", report_to_string(rep, echo));
        write_file_atomic(stem + "_folds.csv", folds_to_string(rep, echo));

        if (plan.save_models) {
          TrainConfig cfg = plan.train;
          cfg.seed = rep_seed;
          FactorModel model;
          switch (cell.mode.kind) {
            case RunMode::Kind::kPlain:
              model = train_pmf(data, cfg);
              break;
            case RunMode::Kind::kDp:
              model = run_dp_pmf(data, cell.mode.epsilon, cfg, cell.mode.smode,
                                 cell.mode.nmode);
              break;
            case RunMode::Kind::kPdp: {
              GroupSpecParams params = cell.mode.spec_params;
              params.seed = cfg.seed;
              PrivacySpecification spec = generate_spec(data, params);
              model = run_pdp_pmf(data, spec, cell.mode.policy, cfg, cell.mode.smode,
                                  cell.mode.nmode)
                          .model;
              break;
            }
          }
          std::string mpath =
              (fs::path(plan.out_dir) / ("model_" + cell_file_stem(cell).substr(5) + ".csv"))
                  .string();
          fs::create_directories(fs::path(mpath).parent_path());
          save_model(mpath, model);
        }
        reports[c] = std::move(rep);
      } catch (const std::exception& e) {
        failures[c] = e.what();
      }
    }
  };

  const int nthreads = std::max(1, std::min<int>(plan.jobs, static_cast<int>(cells.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int failed = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!failures[c].empty()) {
      ++failed;
      std::cerr << "cell " << cell_file_stem(cells[c]) << " failed: " << failures[c] << "\n";
    }
  }

  // Summary rows in plan order: per (sweep value, mode label), aggregated
  // over replications x folds. Groups with failed cells are omitted (their
  // per-cell files, if any, remain).
  struct Group {
    std::string label;
    double value = 0.0;
    bool has_value = false;
    std::vector<double> fold_rmses;
    std::vector<const EvalReport*> reports;
    bool complete = true;
  };
  std::vector<Group> groups;
  for (double v : values) {
    groups.push_back({primary_label, v, swept, {}, {}, true});
    if (plan.dp_baseline) groups.push_back({"dp-baseline", v, swept, {}, {}, true});
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (Group& g : groups) {
      // Baseline cells do not depend on the swept value; they feed the
      // baseline row of every sweep value.
      bool value_match = !swept || cells[c].mode_label == "dp-baseline" ||
                         cells[c].sweep_value == g.value;
      if (g.label != cells[c].mode_label || !value_match) continue;
      if (!failures[c].empty()) {
        g.complete = false;
      } else {
        g.reports.push_back(&reports[c]);
        for (const FoldResult& f : reports[c].folds) g.fold_rmses.push_back(f.rmse);
      }
    }
  }

  std::ostringstream summary, cdf;
  summary << "# pdpmf summary\n";
  cdf << "# pdpmf error cdf\n";
  for (const auto& [k, v] : echo) {
    summary << "# " << k << "=" << v << "\n";
    cdf << "# " << k << "=" << v << "\n";
  }
  summary << "sweep_value,mode,mean_rmse,std_rmse\n";
  cdf << "sweep_value,mode,threshold,fraction\n";
  for (const Group& g : groups) {
    if (!g.complete || g.reports.empty()) continue;
    double mean = 0.0;
    for (double r : g.fold_rmses) mean += r;
    mean /= static_cast<double>(g.fold_rmses.size());
    double var = 0.0;
    for (double r : g.fold_rmses) var += (r - mean) * (r - mean);
    double sd = g.fold_rmses.size() > 1
                    ? std::sqrt(var / static_cast<double>(g.fold_rmses.size() - 1))
                    : 0.0;
    const std::string value_str = g.has_value ? format_double(g.value) : "-";
    summary << value_str << "," << g.label << "," << format_double(mean) << ","
            << format_double(sd) << "\n";

    const std::size_t npoints = g.reports.front()->cdf.size();
    for (std::size_t k = 0; k < npoints; ++k) {
      double frac = 0.0;
      for (const EvalReport* r : g.reports) frac += r->cdf[k].fraction;
      frac /= static_cast<double>(g.reports.size());
      cdf << value_str << "," << g.label << ","
          << format_double(g.reports.front()->cdf[k].threshold) << ","
          << format_double(frac) << "\n";
    }
  }
  write_file_atomic((fs::path(plan.out_dir) / "summary.csv").string(), summary.str());
  write_file_atomic((fs::path(plan.out_dir) / "cdf.csv").string(), cdf.str());

  if (!plan.dataset.synthetic()) {
    std::ostringstream idcsv;
    idcsv << "# pdpmf id map\n";
    idcsv << "kind,dense_index,raw_id\n";
    for (std::size_t i = 0; i < ids.user_ids.size(); ++i)
      idcsv << "user," << i << "," << ids.user_ids[i] << "\n";
    for (std::size_t j = 0; j < ids.item_ids.size(); ++j)
      idcsv << "item," << j << "," << ids.item_ids[j] << "\n";
    write_file_atomic((fs::path(plan.out_dir) / "id_map.csv").string(), idcsv.str());
  }

  return failed;
}

void export_model(const std::string& model_file, const std::string& out_dir,
                  bool include_user_profiles) {
  FactorModel model = load_model(model_file);
  if (include_user_profiles && !model.user_profiles_publishable())
    throw PrivacyPolicyError(
        "user profiles of a " + std::string(privacy_mode_name(model.mode)) +
        "-trained model are confidential and cannot be exported; only the "
        "perturbed item profiles may be released");

  auto section_to_string = [&](const char* tag, const VecArray& m) {
    std::ostringstream out;
    out << "# pdpmf profile export\n";
    out << "# mode=" << privacy_mode_name(model.mode) << "\n";
    out << tag << "," << m.dim << "," << m.count << "\n";
    char buf[32];
    for (int i = 0; i < m.count; ++i) {
      auto c = m.col(i);
      for (int k = 0; k < m.dim; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", c[k]);
        out << (k ? "," : "") << buf;
      }
      out << "\n";
    }
    return out.str();
  };

  fs::create_directories(out_dir);
  write_file_atomic((fs::path(out_dir) / "item_profiles.csv").string(),
                    section_to_string("V", model.item_profiles));
  if (model.user_profiles_publishable()) {
    if (model.user_profiles.count == 0)
      throw ValidationError("model file carries no user profiles");
    write_file_atomic((fs::path(out_dir) / "user_profiles.csv").string(),
                      section_to_string("U", model.user_profiles));
  }
}

}  // namespace pdpmf
