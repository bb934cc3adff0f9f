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

#include "pdpmf/dp_pmf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "pdpmf/errors.hpp"

namespace pdpmf {

const char* noise_mode_name(NoiseMode mode) {
  return mode == NoiseMode::kFixedObjective ? "fixed_objective" : "per_iteration";
}

namespace {

void check_po(const PerturbedObjective& po, const VecArray& V) {
  if (!po.data || !po.user_profiles || !po.noise)
    throw DimensionError("perturbed objective is missing a component");
  const int d = po.user_profiles->dim;
  if (V.dim != d || po.noise->dim != d)
    throw DimensionError("perturbed objective: latent dimension mismatch");
  if (po.user_profiles->count != po.data->num_users() ||
      V.count != po.data->num_items() || po.noise->count != po.data->num_items())
    throw DimensionError("perturbed objective: matrix shape mismatch");
}

void check_users_in_ball(const VecArray& U) {
  for (int i = 0; i < U.count; ++i) {
    if (squared_norm(U.col(i)) > 1.0 + 1e-9)
      throw ValidationError("user profile " + std::to_string(i) +
                            " has norm > 1; the perturbed phase requires all "
                            "user profiles inside the unit ball");
  }
}

}  // namespace

double perturbed_objective_value(const PerturbedObjective& po, const VecArray& V) {
  check_po(po, V);
  const VecArray& U = *po.user_profiles;
  double err = 0.0;
  for (const RatingEntry& e : po.data->entries()) {
    double r = e.value - dot(U.col(e.user), V.col(e.item));
    err += r * r;
  }
  double su = 0.0, sv = 0.0, noise_term = 0.0;
  for (int i = 0; i < U.count; ++i) su += squared_norm(U.col(i));
  for (int j = 0; j < V.count; ++j) {
    sv += squared_norm(V.col(j));
    noise_term += dot(po.noise->col(j), V.col(j));
  }
  // Grouped like the unperturbed objective so a zero noise matrix gives
  // exactly the same value.
  return 0.5 * err + (0.5 * po.lambda_u * su + 0.5 * po.lambda_v * sv) + noise_term;
}

std::vector<double> perturbed_grad_v(const PerturbedObjective& po,
                                     const VecArray& V, int item) {
  check_po(po, V);
  if (item < 0 || item >= V.count) throw DimensionError("item index out of range");
  std::vector<double> g(V.dim, 0.0);
  auto v = V.col(item);
  for (std::uint32_t e : po.data->item_entries(item)) {
    const RatingEntry& en = po.data->entries()[e];
    double res = en.value - dot(po.user_profiles->col(en.user), v);
    axpy(-res, po.user_profiles->col(en.user), g);
  }
  axpy(po.lambda_v, v, g);
  axpy(1.0, po.noise->col(item), g);
  return g;
}

namespace {

// Shared phase-2 loop. `noise_at(sweep)` returns the noise matrix for that
// sweep (nullptr = no perturbation). Synchronous: residuals of the
// previous iterate are computed before any item update.
VecArray phase2_sweeps(const SparseRatings& data, const VecArray& U,
                       const VecArray& V0, const TrainConfig& cfg,
                       const std::function<const VecArray*(int)>& noise_at) {
  cfg.validate();
  if (data.size() == 0) throw ValidationError("cannot train on an empty rating set");
  if (U.count != data.num_users() || V0.count != data.num_items() ||
      U.dim != cfg.d || V0.dim != cfg.d)
    throw DimensionError("phase-2 trainer: matrix shape mismatch");
  check_users_in_ball(U);

  VecArray V = V0;
  std::vector<double> res(data.size());
  std::vector<double> g(cfg.d);
  const auto& es = data.entries();
  const double step =
      cfg.gamma * (cfg.normalize_step ? 1.0 / static_cast<double>(data.size()) : 1.0);

  for (int sweep = 1; sweep <= cfg.k2; ++sweep) {
    const VecArray* noise = noise_at(sweep);

    double err = 0.0;
    for (std::size_t e = 0; e < es.size(); ++e) {
      res[e] = es[e].value - dot(U.col(es[e].user), V.col(es[e].item));
      err += res[e] * res[e];
    }
    double sv = 0.0;
    for (int j = 0; j < V.count; ++j) sv += squared_norm(V.col(j));
    double obj = 0.5 * err + 0.5 * cfg.lambda_v * sv;
    if (!std::isfinite(obj) || obj > kDivergenceBound)
      throw DivergenceError("phase-2 objective diverged at sweep " +
                            std::to_string(sweep) + " (E = " + std::to_string(obj) +
                            "); use a smaller learning rate gamma");

    for (int j = 0; j < V.count; ++j) {
      auto v = V.col(j);
      std::fill(g.begin(), g.end(), 0.0);
      for (std::uint32_t e : data.item_entries(j))
        axpy(-res[e], U.col(es[e].user), g);
      axpy(cfg.lambda_v, v, g);
      if (noise) axpy(1.0, noise->col(j), g);
      axpy(-step, g, v);
    }
  }
  return V;
}

}  // namespace

VecArray train_items_fixed_users(const SparseRatings& data, const VecArray& U,
                                 const VecArray& V0, const TrainConfig& cfg,
                                 const VecArray* fixed_noise) {
  if (fixed_noise &&
      (fixed_noise->dim != cfg.d || fixed_noise->count != data.num_items()))
    throw DimensionError("noise matrix shape mismatch");
  return phase2_sweeps(data, U, V0, cfg, [&](int) { return fixed_noise; });
}

VecArray train_dp_v(const SparseRatings& data, const VecArray& U,
                    const VecArray& V0, double epsilon, const TrainConfig& cfg,
                    SensitivityMode smode, NoiseMode nmode,
                    std::uint64_t noise_seed) {
  NoiseParams params{epsilon, resolve_delta(smode, data.rating_min(), data.rating_max()),
                     cfg.d};
  params.validate();

  const int m = data.num_items();
  auto draw = [&](std::uint64_t sweep_tag) {
    VecArray q(cfg.d, m);
    for (int j = 0; j < m; ++j) {
      Rng rng(derive_seed(noise_seed,
                          {stream::kNoise, sweep_tag, static_cast<std::uint64_t>(j)}));
      auto eta = sample_noise(params, rng);
      std::copy(eta.begin(), eta.end(), q.col(j).begin());
    }
    return q;
  };

  if (nmode == NoiseMode::kFixedObjective) {
    VecArray q = draw(0);
    return phase2_sweeps(data, U, V0, cfg, [&](int) { return &q; });
  }
  // Literal per-sweep redraw; streams keyed by (sweep, item).
  VecArray q;
  return phase2_sweeps(data, U, V0, cfg, [&](int sweep) {
    q = draw(static_cast<std::uint64_t>(sweep));
    return &q;
  });
}

FactorModel run_dp_pmf(const SparseRatings& data, double epsilon,
                       const TrainConfig& cfg, SensitivityMode smode,
                       NoiseMode nmode) {
  FactorModel model = train_pmf(data, cfg);
  model.item_profiles =
      train_dp_v(data, model.user_profiles, model.item_profiles, epsilon, cfg,
                 smode, nmode, derive_seed(cfg.seed, {stream::kNoise}));
  model.mode = PrivacyMode::kDp;
  return model;
}

FactorModel run_plain_pmf(const SparseRatings& data, const TrainConfig& cfg) {
  FactorModel model = train_pmf(data, cfg);
  model.item_profiles = train_items_fixed_users(
      data, model.user_profiles, model.item_profiles, cfg, nullptr);
  return model;
}

}  // namespace pdpmf
