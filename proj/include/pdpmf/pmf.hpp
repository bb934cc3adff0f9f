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
#include <vector>

#include "pdpmf/model.hpp"
#include "pdpmf/ratings.hpp"

namespace pdpmf {

// Training parameters for the factorization.
//
// normalize_step: when set, the per-sweep step size is gamma / |entries|
// instead of gamma. Gradients themselves always follow the exact
// regularized sum-of-squared-errors objective; the flag only rescales the
// step, so learning rates quoted for per-rating updates remain usable with
// full-batch sweeps and the objective being minimized is unchanged.
// Default on; small hand-tuned instances typically turn it off.
//
// project_each_sweep: re-project every user profile onto the closed unit
// ball after each sweep (projected gradient descent) instead of only once
// at the end. Item profiles then adapt to the constrained user profiles
// during training, which preserves utility; a final projection alone can
// badly distort a trained model. Default on. The unit-norm bound on user
// profiles is required by the privacy analysis of the perturbed phase-2
// objective, so train_pmf guarantees it on output either way.
struct TrainConfig {
  int d = 20;
  double gamma = 50.0;
  double lambda_u = 0.01;
  double lambda_v = 0.01;
  int k1 = 50;
  int k2 = 50;
  std::uint64_t seed = 0;
  bool normalize_step = true;
  bool project_each_sweep = true;

  // Throws ValidationError on non-positive gamma/lambdas/d/k1/k2.
  void validate() const;
};

// Objective value becomes a divergence error beyond this bound.
inline constexpr double kDivergenceBound = 1e12;

// Regularized sum-of-squared-errors objective
//   E(U,V) = 1/2 sum_ij I_ij (r_ij - u_i.v_j)^2
//          + lambda_u/2 sum_i |u_i|^2 + lambda_v/2 sum_j |v_j|^2
double objective(const SparseRatings& data, const FactorModel& model,
                 const TrainConfig& cfg);

// Analytic gradients of the objective with respect to one profile vector:
//   grad_u_i = -sum_j I_ij (r_ij - u_i.v_j) v_j + lambda_u u_i
//   grad_v_j = -sum_i I_ij (r_ij - u_i.v_j) u_i + lambda_v v_j
std::vector<double> grad_u(const SparseRatings& data, const FactorModel& model,
                           const TrainConfig& cfg, int user);
std::vector<double> grad_v(const SparseRatings& data, const FactorModel& model,
                           const TrainConfig& cfg, int item);

// Full-batch synchronous gradient descent on the objective: every profile
// vector is initialized as an independent uniformly random unit vector
// (streams keyed per entity), then k1 sweeps compute all gradients from the
// previous iterate before applying any update. User profiles are projected
// onto the closed unit ball (each sweep and/or at the end, per config).
// Deterministic given cfg.seed.
//
// Throws DivergenceError naming the sweep if the objective exceeds
// kDivergenceBound or becomes non-finite; the message suggests a smaller
// gamma.
FactorModel train_pmf(const SparseRatings& data, const TrainConfig& cfg);

// Same, but starting from a caller-supplied model instead of random
// initialization. Used by composition tests.
FactorModel train_pmf_from(const SparseRatings& data, const TrainConfig& cfg,
                           FactorModel init);

}  // namespace pdpmf
