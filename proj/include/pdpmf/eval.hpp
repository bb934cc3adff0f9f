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
#include <utility>
#include <vector>

#include "pdpmf/pdp.hpp"

namespace pdpmf {

// Root mean squared error of clamped predictions over a non-empty test
// set. Throws ValidationError on an empty set, DimensionError if the model
// does not cover the test indices.
double rmse(const FactorModel& model, const SparseRatings& test);

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

// Fraction of test entries with |prediction - rating| <= x for each
// threshold x. Thresholds must be ascending within [0, r_max]. With
// clamped predictions the final point at r_max is always 1.
std::vector<CdfPoint> error_cdf(const FactorModel& model,
                                const SparseRatings& test,
                                const std::vector<double>& thresholds);

// 0.0, 0.1, ..., r_max.
std::vector<double> default_cdf_thresholds(double r_max);

// Which scheme a cross-validation run trains.
struct RunMode {
  enum class Kind { kPlain, kDp, kPdp };
  Kind kind = Kind::kPlain;
  double epsilon = 0.1;          // dp only
  GroupSpecParams spec_params;   // pdp only
  ThresholdPolicy policy;        // pdp only
  SensitivityMode smode = SensitivityMode::kAddRemove;
  NoiseMode nmode = NoiseMode::kFixedObjective;

  static RunMode plain();
  static RunMode dp(double epsilon);
  static RunMode pdp(GroupSpecParams params, ThresholdPolicy policy);
  std::string describe() const;
};

struct FoldResult {
  int fold = 0;
  std::size_t n_test = 0;
  double sse = 0.0;   // sum of squared prediction errors
  double rmse = 0.0;  // sqrt(sse / n_test)
  double threshold = 0.0;  // resolved t (pdp runs; 0 otherwise)
  std::size_t train_size = 0;  // after sampling, for pdp
};

struct EvalReport {
  double mean_rmse = 0.0;    // unweighted mean of per-fold RMSEs
  double pooled_rmse = 0.0;  // sqrt(total sse / total n); kept for re-aggregation
  std::vector<CdfPoint> cdf;  // pointwise mean across folds
  std::size_t n_test = 0;     // total test entries across folds
  std::vector<FoldResult> folds;
  std::vector<std::pair<std::string, std::string>> config_echo;
};

// k-fold cross validation of one scheme: per fold, train on the other
// k-1 folds and evaluate on the held-out one. The fold split and all
// per-fold training randomness derive from `seed`, so two runs with the
// same seed (e.g. different schemes being compared) share folds and
// per-cell seed streams. Folds are independent and may run concurrently.
EvalReport crossval_run(const SparseRatings& data, const RunMode& mode,
                        const TrainConfig& cfg, int folds, std::uint64_t seed,
                        int jobs = 1);

// Per-fold seed used by crossval_run; exposed so single-fold experiments
// can reproduce any cell in isolation.
std::uint64_t fold_seed(std::uint64_t seed, int fold);

// Report CSVs: a `metric,value` block plus a `threshold,fraction` table,
// and a line-per-fold detail file.
void save_report(const std::string& path, const EvalReport& report);
void save_report_folds(const std::string& path, const EvalReport& report);

}  // namespace pdpmf
