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

#include "pdpmf/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdpmf/errors.hpp"
#include "pdpmf/rng.hpp"

namespace pdpmf {

void TrainConfig::validate() const {
  if (d < 1) throw ValidationError("latent dimension must be >= 1");
  if (!(gamma > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(lambda_u > 0.0) || !(lambda_v > 0.0))
    throw ValidationError("regularization weights must be positive");
  if (k1 < 1 || k2 < 1) throw ValidationError("iteration counts must be >= 1");
}

namespace {

void check_dims(const SparseRatings& data, const FactorModel& model) {
  if (model.num_users() != data.num_users() || model.num_items() != data.num_items() ||
      model.user_profiles.dim != model.d || model.item_profiles.dim != model.d)
    throw DimensionError("model dimensions do not match data (" +
                         std::to_string(model.num_users()) + "x" +
                         std::to_string(model.num_items()) + " vs " +
                         std::to_string(data.num_users()) + "x" +
                         std::to_string(data.num_items()) + ")");
}

double regularization(const FactorModel& model, const TrainConfig& cfg) {
  double su = 0.0, sv = 0.0;
  for (int i = 0; i < model.num_users(); ++i)
    su += squared_norm(model.user_profiles.col(i));
  for (int j = 0; j < model.num_items(); ++j)
    sv += squared_norm(model.item_profiles.col(j));
  return 0.5 * cfg.lambda_u * su + 0.5 * cfg.lambda_v * sv;
}

// Residuals r_ij - u_i.v_j for every entry, in entry order.
void residuals(const SparseRatings& data, const VecArray& U, const VecArray& V,
               std::vector<double>& out) {
  const auto& es = data.entries();
  out.resize(es.size());
  for (std::size_t e = 0; e < es.size(); ++e)
    out[e] = es[e].value - dot(U.col(es[e].user), V.col(es[e].item));
}

void project_unit_ball(VecArray& profiles) {
  for (int i = 0; i < profiles.count; ++i) {
    auto c = profiles.col(i);
    double n2 = squared_norm(c);
    if (n2 > 1.0) scale(1.0 / std::sqrt(n2), c);
  }
}

}  // namespace

double objective(const SparseRatings& data, const FactorModel& model,
                 const TrainConfig& cfg) {
  check_dims(data, model);
  double err = 0.0;
  for (const RatingEntry& e : data.entries()) {
    double r = e.value - dot(model.user_profiles.col(e.user),
                             model.item_profiles.col(e.item));
    err += r * r;
  }
  return 0.5 * err + regularization(model, cfg);
}

std::vector<double> grad_u(const SparseRatings& data, const FactorModel& model,
                           const TrainConfig& cfg, int user) {
  check_dims(data, model);
  if (user < 0 || user >= data.num_users())
    throw DimensionError("user index out of range");
  std::vector<double> g(model.d, 0.0);
  auto u = model.user_profiles.col(user);
  for (std::uint32_t e : data.user_entries(user)) {
    const RatingEntry& en = data.entries()[e];
    double res = en.value - dot(u, model.item_profiles.col(en.item));
    axpy(-res, model.item_profiles.col(en.item), g);
  }
  axpy(cfg.lambda_u, u, g);
  return g;
}

std::vector<double> grad_v(const SparseRatings& data, const FactorModel& model,
                           const TrainConfig& cfg, int item) {
  check_dims(data, model);
  if (item < 0 || item >= data.num_items())
    throw DimensionError("item index out of range");
  std::vector<double> g(model.d, 0.0);
  auto v = model.item_profiles.col(item);
  for (std::uint32_t e : data.item_entries(item)) {
    const RatingEntry& en = data.entries()[e];
    double res = en.value - dot(model.user_profiles.col(en.user), v);
    axpy(-res, model.user_profiles.col(en.user), g);
  }
  axpy(cfg.lambda_v, v, g);
  return g;
}

FactorModel train_pmf(const SparseRatings& data, const TrainConfig& cfg) {
  cfg.validate();
  FactorModel model;
  model.d = cfg.d;
  model.rating_min = data.rating_min();
  model.rating_max = data.rating_max();
  model.user_profiles = VecArray(cfg.d, data.num_users());
  model.item_profiles = VecArray(cfg.d, data.num_items());
  for (int i = 0; i < data.num_users(); ++i) {
    Rng rng(derive_seed(cfg.seed, {stream::kUserInit, static_cast<std::uint64_t>(i)}));
    auto u = sample_unit_vector(cfg.d, rng);
    std::copy(u.begin(), u.end(), model.user_profiles.col(i).begin());
  }
  for (int j = 0; j < data.num_items(); ++j) {
    Rng rng(derive_seed(cfg.seed, {stream::kItemInit, static_cast<std::uint64_t>(j)}));
    auto v = sample_unit_vector(cfg.d, rng);
    std::copy(v.begin(), v.end(), model.item_profiles.col(j).begin());
  }
  return train_pmf_from(data, cfg, std::move(model));
}

FactorModel train_pmf_from(const SparseRatings& data, const TrainConfig& cfg,
                           FactorModel model) {
  cfg.validate();
  if (data.size() == 0) throw ValidationError("cannot train on an empty rating set");
  check_dims(data, model);

  VecArray& U = model.user_profiles;
  VecArray& V = model.item_profiles;
  VecArray GU(cfg.d, U.count), GV(cfg.d, V.count);
  std::vector<double> res;
  const double step =
      cfg.gamma * (cfg.normalize_step ? 1.0 / static_cast<double>(data.size()) : 1.0);

  for (int sweep = 1; sweep <= cfg.k1; ++sweep) {
    residuals(data, U, V, res);

    double err = 0.0;
    for (double r : res) err += r * r;
    double obj = 0.5 * err + regularization(model, cfg);
    if (!std::isfinite(obj) || obj > kDivergenceBound)
      throw DivergenceError("objective diverged at sweep " + std::to_string(sweep) +
                            " (E = " + std::to_string(obj) +
                            "); use a smaller learning rate gamma");

    // All gradients read the previous iterate; updates are applied after.
    std::fill(GU.data.begin(), GU.data.end(), 0.0);
    std::fill(GV.data.begin(), GV.data.end(), 0.0);
    const auto& es = data.entries();
    for (int i = 0; i < U.count; ++i) {
      auto g = GU.col(i);
      for (std::uint32_t e : data.user_entries(i))
        axpy(-res[e], V.col(es[e].item), g);
      axpy(cfg.lambda_u, U.col(i), g);
    }
    for (int j = 0; j < V.count; ++j) {
      auto g = GV.col(j);
      for (std::uint32_t e : data.item_entries(j))
        axpy(-res[e], U.col(es[e].user), g);
      axpy(cfg.lambda_v, V.col(j), g);
    }

    for (std::size_t k = 0; k < U.data.size(); ++k) U.data[k] -= step * GU.data[k];
    for (std::size_t k = 0; k < V.data.size(); ++k) V.data[k] -= step * GV.data[k];

    if (cfg.project_each_sweep) project_unit_ball(U);
  }

  project_unit_ball(U);

  residuals(data, U, V, res);
  double err = 0.0;
  for (double r : res) err += r * r;
  double obj = 0.5 * err + regularization(model, cfg);
  if (!std::isfinite(obj) || obj > kDivergenceBound)
    throw DivergenceError("objective diverged after final sweep (E = " +
                          std::to_string(obj) + "); use a smaller learning rate gamma");
  return model;
}

}  // namespace pdpmf
