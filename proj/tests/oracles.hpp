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
//
// Independent test oracles. Everything here recomputes quantities from
// first principles through a different code path than the library:
// dense double loops, elementwise finite differences, closed-form
// distribution functions. Kept implementation-free of pdpmf internals on
// purpose.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "pdpmf/dp_pmf.hpp"
#include "pdpmf/pmf.hpp"
#include "pdpmf/ratings.hpp"

namespace oracle {

// Dense rating lookup built from the entry list.
inline std::vector<double> dense_matrix(const pdpmf::SparseRatings& data) {
  std::vector<double> r(static_cast<std::size_t>(data.num_users()) * data.num_items(), 0.0);
  for (const auto& e : data.entries())
    r[static_cast<std::size_t>(e.user) * data.num_items() + e.item] = e.value;
  return r;
}

// Term-by-term recomputation of the regularized squared-error objective
// with an N x M double loop over the dense matrix (zero = unrated).
inline double objective_bruteforce(const pdpmf::SparseRatings& data,
                                   const pdpmf::FactorModel& model,
                                   double lambda_u, double lambda_v) {
  const int n = data.num_users(), m = data.num_items(), d = model.d;
  std::vector<double> r = dense_matrix(data);
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      double rij = r[static_cast<std::size_t>(i) * m + j];
      if (rij == 0.0) continue;  // zero is the reserved unrated marker
      double p = 0.0;
      for (int k = 0; k < d; ++k)
        p += model.user_profiles.col(i)[k] * model.item_profiles.col(j)[k];
      err += (rij - p) * (rij - p);
    }
  double su = 0.0, sv = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k)
      su += model.user_profiles.col(i)[k] * model.user_profiles.col(i)[k];
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < d; ++k)
      sv += model.item_profiles.col(j)[k] * model.item_profiles.col(j)[k];
  return 0.5 * err + 0.5 * lambda_u * su + 0.5 * lambda_v * sv;
}

// Same double-loop recomputation for the perturbed phase-2 objective.
inline double perturbed_objective_bruteforce(const pdpmf::SparseRatings& data,
                                             const pdpmf::VecArray& U,
                                             const pdpmf::VecArray& V,
                                             const pdpmf::VecArray& noise,
                                             double lambda_u, double lambda_v) {
  pdpmf::FactorModel m;
  m.d = U.dim;
  m.user_profiles = U;
  m.item_profiles = V;
  double base = objective_bruteforce(data, m, lambda_u, lambda_v);
  double noise_term = 0.0;
  for (int j = 0; j < V.count; ++j)
    for (int k = 0; k < V.dim; ++k) noise_term += noise.col(j)[k] * V.col(j)[k];
  return base + noise_term;
}

// RMSE recomputed with an independent loop over test entries.
inline double rmse_bruteforce(const pdpmf::FactorModel& model,
                              const pdpmf::SparseRatings& test) {
  double sse = 0.0;
  for (const auto& e : test.entries()) {
    double p = 0.0;
    for (int k = 0; k < model.d; ++k)
      p += model.user_profiles.col(e.user)[k] * model.item_profiles.col(e.item)[k];
    p = std::min(std::max(p, model.rating_min), model.rating_max);
    sse += (p - e.value) * (p - e.value);
  }
  return std::sqrt(sse / static_cast<double>(test.size()));
}

// Central finite difference of a scalar function along one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Relative error between an analytic gradient and its finite-difference
// estimate, max over coordinates, scaled by the gradient norm.
inline double gradient_relative_error(const std::vector<double>& analytic,
                                      const std::vector<double>& numeric) {
  double norm = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    norm += analytic[k] * analytic[k];
    diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-8);
}

// Regularized lower incomplete gamma P(shape, x/scale) for integer shape:
// the CDF of a Gamma(shape, scale) variable,
//   P = 1 - exp(-y) * sum_{k<shape} y^k / k!,  y = x / scale.
inline double gamma_cdf_integer_shape(int shape, double scale, double x) {
  if (x <= 0.0) return 0.0;
  double y = x / scale;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < shape; ++k) {
    term *= y / k;
    sum += term;
  }
  return 1.0 - std::exp(-y) * sum;
}

// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    stat = std::max(stat, std::abs(f - static_cast<double>(i + 1) / n));
    stat = std::max(stat, std::abs(f - static_cast<double>(i) / n));
  }
  return stat;
}

// Asymptotic two-sided KS critical value at significance alpha.
inline double ks_critical(double alpha, std::size_t n) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

// Random small instance for gradient/oracle property tests: dimensions and
// density drawn from the given engine, ratings in [1, 5].
inline pdpmf::SparseRatings random_instance(std::mt19937_64& rng, int max_users = 30,
                                            int max_items = 30) {
  std::uniform_int_distribution<int> nu(2, max_users), ni(2, max_items);
  std::uniform_real_distribution<double> rat(1.0, 5.0), density(0.2, 0.8);
  int n = nu(rng), m = ni(rng);
  double p = density(rng);
  std::vector<pdpmf::RatingEntry> entries;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (unit(rng) < p) entries.push_back({i, j, rat(rng)});
  if (entries.empty()) entries.push_back({0, 0, rat(rng)});
  return pdpmf::SparseRatings(n, m, std::move(entries), 1.0, 5.0);
}

// Random model with profile entries in [-1, 1] (users rescaled into the
// unit ball when `ball` is set).
inline pdpmf::FactorModel random_model(std::mt19937_64& rng,
                                       const pdpmf::SparseRatings& data, int d,
                                       bool users_in_ball = false) {
  pdpmf::FactorModel model;
  model.d = d;
  model.rating_min = data.rating_min();
  model.rating_max = data.rating_max();
  model.user_profiles = pdpmf::VecArray(d, data.num_users());
  model.item_profiles = pdpmf::VecArray(d, data.num_items());
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (double& x : model.user_profiles.data) x = coef(rng);
  for (double& x : model.item_profiles.data) x = coef(rng);
  if (users_in_ball) {
    for (int i = 0; i < model.num_users(); ++i) {
      auto u = model.user_profiles.col(i);
      double nrm = pdpmf::norm(u);
      if (nrm > 1.0) pdpmf::scale(1.0 / nrm, u);
    }
  }
  return model;
}

}  // namespace oracle
