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

#include <vector>

#include "pdpmf/rng.hpp"

namespace pdpmf {

// How the sensitivity Delta of one rating is resolved from the rating
// range. Neighboring datasets that add/remove a rating give r_max; the
// modify flavor (both ratings nonzero) gives r_max - r_min. Under the
// modify flavor the sampling-based personalized guarantee degrades to a
// factor 2 in each budget; budgets are NOT silently rescaled here.
enum class SensitivityMode { kAddRemove, kModify };

const char* sensitivity_mode_name(SensitivityMode mode);

// Throws ValidationError if the resolved value is not positive.
double resolve_delta(SensitivityMode mode, double rating_min,
                     double rating_max);

// Parameters of the perturbation noise density  p(eta) ~ exp(-eps |eta| / Delta).
struct NoiseParams {
  double epsilon = 1.0;  // privacy budget, > 0
  double delta = 5.0;    // sensitivity, > 0
  int dim = 20;

  void validate() const;  // throws ValidationError
};

// Draws one noise vector with density proportional to
// exp(-eps * |eta|_2 / Delta). Factorized exactly as a uniform direction
// on the unit sphere times a Gamma(shape=dim, scale=Delta/eps) radius:
// integrating the density over directions leaves a radial law
// r^(dim-1) exp(-eps r / Delta). The integer shape lets the radius be the
// sum of dim independent exponentials; no rejection step is needed.
std::vector<double> sample_noise(const NoiseParams& params, Rng& rng);

}  // namespace pdpmf
