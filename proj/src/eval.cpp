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

#include "pdpmf/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pdpmf/errors.hpp"

namespace pdpmf {

namespace {

void check_model_covers(const FactorModel& model, const SparseRatings& test) {
  if (model.num_users() < test.num_users() || model.num_items() < test.num_items())
    throw DimensionError("model does not cover the test set (" +
                         std::to_string(model.num_users()) + "x" +
                         std::to_string(model.num_items()) + " vs " +
                         std::to_string(test.num_users()) + "x" +
                         std::to_string(test.num_items()) + ")");
}

double squared_error_sum(const FactorModel& model, const SparseRatings& test) {
  double sse = 0.0;
  for (const RatingEntry& e : test.entries()) {
    double err = predict(model, e.user, e.item) - e.value;
    sse += err * err;
  }
  return sse;
}

}  // namespace

double rmse(const FactorModel& model, const SparseRatings& test) {
  if (test.size() == 0) throw ValidationError("cannot evaluate on an empty test set");
  check_model_covers(model, test);
  return std::sqrt(squared_error_sum(model, test) / static_cast<double>(test.size()));
}

std::vector<CdfPoint> error_cdf(const FactorModel& model, const SparseRatings& test,
                                const std::vector<double>& thresholds) {
  if (test.size() == 0) throw ValidationError("cannot evaluate on an empty test set");
  check_model_covers(model, test);
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (thresholds[k] < 0.0 || thresholds[k] > model.rating_max ||
        (k > 0 && thresholds[k] < thresholds[k - 1]))
      throw ValidationError("cdf thresholds must ascend within [0, r_max]");
  }

  std::vector<double> errs;
  errs.reserve(test.size());
  for (const RatingEntry& e : test.entries())
    errs.push_back(std::abs(predict(model, e.user, e.item) - e.value));
  std::sort(errs.begin(), errs.end());

  std::vector<CdfPoint> cdf;
  cdf.reserve(thresholds.size());
  std::size_t pos = 0;
  for (double x : thresholds) {
    while (pos < errs.size() && errs[pos] <= x) ++pos;
    cdf.push_back({x, static_cast<double>(pos) / static_cast<double>(errs.size())});
  }
  return cdf;
}

std::vector<double> default_cdf_thresholds(double r_max) {
  std::vector<double> xs;
  for (int k = 0; k / 10.0 <= r_max + 1e-9; ++k) xs.push_back(k / 10.0);
  if (!xs.empty() && xs.back() > r_max) xs.back() = r_max;
  return xs;
}

RunMode RunMode::plain() { return {}; }

RunMode RunMode::dp(double epsilon) {
  RunMode m;
  m.kind = Kind::kDp;
  m.epsilon = epsilon;
  return m;
}

RunMode RunMode::pdp(GroupSpecParams params, ThresholdPolicy policy) {
  RunMode m;
  m.kind = Kind::kPdp;
  m.spec_params = params;
  m.policy = policy;
  return m;
}

std::string RunMode::describe() const {
  char buf[160];
  switch (kind) {
    case Kind::kPlain:
      return "plain";
    case Kind::kDp:
      std::snprintf(buf, sizeof buf, "dp(eps=%g)", epsilon);
      return buf;
    case Kind::kPdp:
      std::snprintf(buf, sizeof buf, "pdp(f_c=%g,f_m=%g,eps_c=%g,eps_m=%g,eps_l=%g,t=%s)",
                    spec_params.f_c, spec_params.f_m, spec_params.eps_c,
                    spec_params.eps_m, spec_params.eps_l, policy.describe().c_str());
      return buf;
  }
  return "?";
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  return derive_seed(seed, {stream::kCell, static_cast<std::uint64_t>(fold)});
}

EvalReport crossval_run(const SparseRatings& data, const RunMode& mode,
                        const TrainConfig& cfg, int folds, std::uint64_t seed,
                        int jobs) {
  if (folds < 2) throw ValidationError("cross validation needs at least 2 folds");
  cfg.validate();
  FoldSplit split = split_folds(data, folds, seed);
  const std::vector<double> thresholds = default_cdf_thresholds(data.rating_max());

  EvalReport report;
  report.folds.resize(folds);
  std::vector<std::vector<CdfPoint>> fold_cdfs(folds);

  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (int f = next.fetch_add(1); f < folds; f = next.fetch_add(1)) {
      try {
        SparseRatings train = fold_train(data, split, f);
        SparseRatings test = fold_test(data, split, f);
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = fold_seed(seed, f);

        FoldResult r;
        r.fold = f;
        r.train_size = train.size();
        FactorModel model;
        switch (mode.kind) {
          case RunMode::Kind::kPlain:
            model = train_pmf(train, fold_cfg);
            break;
          case RunMode::Kind::kDp:
            model = run_dp_pmf(train, mode.epsilon, fold_cfg, mode.smode, mode.nmode);
            break;
          case RunMode::Kind::kPdp: {
            GroupSpecParams params = mode.spec_params;
            params.seed = fold_cfg.seed;
            PrivacySpecification spec = generate_spec(train, params);
            PdpRunResult res =
                run_pdp_pmf(train, spec, mode.policy, fold_cfg, mode.smode, mode.nmode);
            model = std::move(res.model);
            r.threshold = res.threshold;
            r.train_size = res.sampled_size;
            break;
          }
        }
        r.n_test = test.size();
        r.sse = squared_error_sum(model, test);
        r.rmse = std::sqrt(r.sse / static_cast<double>(r.n_test));
        fold_cdfs[f] = error_cdf(model, test, thresholds);
        report.folds[f] = r;
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int nthreads = std::max(1, std::min(jobs, folds));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  double sum_rmse = 0.0, total_sse = 0.0;
  for (const FoldResult& r : report.folds) {
    sum_rmse += r.rmse;
    total_sse += r.sse;
    report.n_test += r.n_test;
  }
  report.mean_rmse = sum_rmse / folds;
  report.pooled_rmse = std::sqrt(total_sse / static_cast<double>(report.n_test));
  report.cdf.reserve(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    double s = 0.0;
    for (int f = 0; f < folds; ++f) s += fold_cdfs[f][k].fraction;
    report.cdf.push_back({thresholds[k], s / folds});
  }

  report.config_echo = {
      {"mode", mode.describe()},
      {"folds", std::to_string(folds)},
      {"seed", std::to_string(seed)},
      {"d", std::to_string(cfg.d)},
      {"gamma", std::to_string(cfg.gamma)},
      {"lambda_u", std::to_string(cfg.lambda_u)},
      {"lambda_v", std::to_string(cfg.lambda_v)},
      {"k1", std::to_string(cfg.k1)},
      {"k2", std::to_string(cfg.k2)},
      {"normalize_step", cfg.normalize_step ? "on" : "off"},
      {"project_each_sweep", cfg.project_each_sweep ? "on" : "off"},
      {"sensitivity", sensitivity_mode_name(mode.smode)},
      {"noise_mode", noise_mode_name(mode.nmode)},
      {"users", std::to_string(data.num_users())},
      {"items", std::to_string(data.num_items())},
      {"ratings", std::to_string(data.size())},
  };
  return report;
}

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

void save_report(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# pdpmf report\n";
  for (const auto& [k, v] : report.config_echo) out << "# " << k << "=" << v << "\n";
  out << "metric,value\n";
  out << "mean_rmse," << format_double(report.mean_rmse) << "\n";
  out << "pooled_rmse," << format_double(report.pooled_rmse) << "\n";
  out << "n_test," << report.n_test << "\n";
  out << "folds," << report.folds.size() << "\n";
  out << "threshold,fraction\n";
  for (const CdfPoint& p : report.cdf)
    out << format_double(p.threshold) << "," << format_double(p.fraction) << "\n";
  if (!out) throw Error("failed writing " + path);
}

void save_report_folds(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# pdpmf per-fold detail\n";
  for (const auto& [k, v] : report.config_echo) out << "# " << k << "=" << v << "\n";
  out << "fold,n_test,sse,rmse,threshold,train_size\n";
  for (const FoldResult& r : report.folds) {
    out << r.fold << "," << r.n_test << "," << format_double(r.sse) << ","
        << format_double(r.rmse) << "," << format_double(r.threshold) << ","
        << r.train_size << "\n";
  }
  if (!out) throw Error("failed writing " + path);
}

}  // namespace pdpmf
