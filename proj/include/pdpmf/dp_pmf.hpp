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
#include <optional>

#include "pdpmf/noise.hpp"
#include "pdpmf/pmf.hpp"

namespace pdpmf {

// When the per-item noise vectors are drawn. The privacy argument covers
// the minimizer of one fixed perturbed objective, so the default draws
// each eta_j once before phase 2 and keeps it through all sweeps.
// Redrawing every sweep is available for fidelity experiments but carries
// no stated guarantee.
enum class NoiseMode { kFixedObjective, kPerIteration };

const char* noise_mode_name(NoiseMode mode);

// The perturbed phase-2 objective over item profiles V, with user profiles
// held fixed:
//   E~(V) = 1/2 sum_ij I_ij (r_ij - u_i.v_j)^2
//         + lambda_u/2 sum_i |u_i|^2 + lambda_v/2 sum_j |v_j|^2
//         + sum_j eta_j . v_j
struct PerturbedObjective {
  const SparseRatings* data = nullptr;
  const VecArray* user_profiles = nullptr;
  const VecArray* noise = nullptr;  // d x M, one eta_j per item
  double lambda_u = 0.01;
  double lambda_v = 0.01;
  double epsilon = 1.0;  // budget the noise was calibrated for
};

// Evaluates the perturbed objective exactly (including the constant
// user-regularization term). Throws DimensionError on mismatched shapes.
double perturbed_objective_value(const PerturbedObjective& po,
                                 const VecArray& item_profiles);

// Analytic gradient of the perturbed objective for one item:
//   -sum_i I_ij (r_ij - u_i.v_j) u_i + lambda_v v_j + eta_j
std::vector<double> perturbed_grad_v(const PerturbedObjective& po,
                                     const VecArray& item_profiles, int item);

// Core phase-2 loop: k2 synchronous gradient sweeps over item profiles
// starting from `item_init`, with user profiles fixed. `fixed_noise`
// (d x M) is added to every item gradient; pass nullptr for non-private
// refinement. Step size follows cfg (gamma, normalize_step). Requires
// |u_i| <= 1 for all users. Throws DivergenceError / ValidationError.
VecArray train_items_fixed_users(const SparseRatings& data,
                                 const VecArray& user_profiles,
                                 const VecArray& item_init,
                                 const TrainConfig& cfg,
                                 const VecArray* fixed_noise);

// Phase-2 trainer with privacy noise: draws eta_j from the calibrated
// density (streams keyed by item index for reproducible parallel
// generation) and runs k2 perturbed-gradient sweeps from `item_init`.
// Deterministic given noise_seed.
VecArray train_dp_v(const SparseRatings& data, const VecArray& user_profiles,
                    const VecArray& item_init, double epsilon,
                    const TrainConfig& cfg, SensitivityMode smode,
                    NoiseMode nmode, std::uint64_t noise_seed);

// The complete two-step uniformly private scheme: phase 1 trains both
// profile matrices non-privately (the user matrix stays confidential);
// phase 2 re-trains the item matrix against the noise-perturbed objective
// with budget epsilon. Only the item matrix of the result is publishable.
FactorModel run_dp_pmf(const SparseRatings& data, double epsilon,
                       const TrainConfig& cfg, SensitivityMode smode,
                       NoiseMode nmode);

// Non-private counterpart with the same two-phase shape: phase 1, then k2
// unperturbed item-refinement sweeps. This is the vanishing-noise limit of
// run_dp_pmf and the reference its results are compared against.
FactorModel run_plain_pmf(const SparseRatings& data, const TrainConfig& cfg);

}  // namespace pdpmf
