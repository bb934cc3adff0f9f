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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdpmf/eval.hpp"

namespace pdpmf {

inline constexpr const char* kVersion = "0.1.0";

// Where the ratings come from. `synth` is a deterministic benchmark
// generator shaped like public movie-rating datasets (skewed popularity,
// integer ratings 1..5 from a low-rank-plus-noise model); it exists so the
// experiment grid runs out of the box when the real datasets are not on
// disk.
struct DatasetSpec {
  std::string path;  // empty => synthetic
  MovielensFormat format = MovielensFormat::kTabSeparated;
  int synth_users = 943;
  int synth_items = 1682;
  long long synth_entries = 100000;
  std::uint64_t synth_seed = 99;

  bool synthetic() const { return path.empty(); }
  std::string describe() const;
};

SparseRatings load_dataset(const DatasetSpec& spec, IdMap* ids = nullptr);

// Benchmark ratings generator backing `--dataset synth`.
SparseRatings synth_benchmark(int users, int items, long long entries,
                              std::uint64_t seed);

enum class SweepVariable { kNone, kConservativeFraction, kModerateEpsilon,
                           kThreshold, kEpsilon };

const char* sweep_variable_name(SweepVariable v);

// One experiment grid: (sweep values) x (replications) x (folds), plus an
// optional uniform-DP baseline run alongside for comparison.
struct ExperimentPlan {
  DatasetSpec dataset;
  RunMode mode;  // base scheme; swept parameter overrides per value
  TrainConfig train;
  SweepVariable sweep = SweepVariable::kNone;
  std::vector<double> sweep_values;
  bool dp_baseline = false;
  double dp_baseline_epsilon = 0.1;
  int replications = 5;
  int folds = 10;
  std::uint64_t master_seed = 42;
  std::string out_dir = "results";
  int jobs = 1;
  bool save_models = false;
  std::string preset;  // echoed into outputs

  void validate() const;
  std::vector<std::pair<std::string, std::string>> echo() const;
};

// Applies one of the canned parameter sets (fig2, fig3, fig4, fig5) to the
// plan: privacy-specification grids, sweep variable and values, and the
// DP baseline where the grid calls for one.
void apply_preset(ExperimentPlan& plan, const std::string& name);

// Runs the full grid and writes, under plan.out_dir:
//   summary.csv   sweep_value,mode,mean_rmse,std_rmse
//   cdf.csv       sweep_value,mode,threshold,fraction
//   cells/...     one report (+ per-fold detail) per grid cell
//   id_map.csv    dense-index -> raw-id table (parsed datasets)
// Every file embeds the resolved configuration as leading comment lines
// and is written atomically. Returns the number of failed cells; partial
// results are preserved on failure.
int run_experiment(const ExperimentPlan& plan);

// Writes the publishable parts of a stored model as CSV next to `out_dir`:
// item profiles always; user profiles only for plainly trained models.
// Requesting user profiles from a privately trained model is a hard
// PrivacyPolicyError, never a silent downgrade.
void export_model(const std::string& model_file, const std::string& out_dir,
                  bool include_user_profiles);

}  // namespace pdpmf
