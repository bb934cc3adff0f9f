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

#include "pdpmf/noise.hpp"

#include "pdpmf/errors.hpp"

namespace pdpmf {

const char* sensitivity_mode_name(SensitivityMode mode) {
  return mode == SensitivityMode::kAddRemove ? "add_remove" : "modify";
}

double resolve_delta(SensitivityMode mode, double rating_min, double rating_max) {
  double delta = mode == SensitivityMode::kAddRemove ? rating_max
                                                     : rating_max - rating_min;
  if (!(delta > 0.0))
    throw ValidationError("resolved sensitivity must be positive (rating range [" +
                          std::to_string(rating_min) + ", " +
                          std::to_string(rating_max) + "])");
  return delta;
}

void NoiseParams::validate() const {
  if (!(epsilon > 0.0)) throw ValidationError("privacy budget epsilon must be positive");
  if (!(delta > 0.0)) throw ValidationError("sensitivity delta must be positive");
  if (dim < 1) throw ValidationError("noise dimension must be >= 1");
}

std::vector<double> sample_noise(const NoiseParams& params, Rng& rng) {
  params.validate();
  std::vector<double> eta = sample_unit_vector(params.dim, rng);
  // Radius ~ Gamma(shape=dim, scale=delta/eps); integer shape, so a sum of
  // dim independent exponentials is exact.
  std::exponential_distribution<double> exp_dist(params.epsilon / params.delta);
  double radius = 0.0;
  for (int k = 0; k < params.dim; ++k) radius += exp_dist(rng);
  for (double& x : eta) x *= radius;
  return eta;
}

}  // namespace pdpmf
