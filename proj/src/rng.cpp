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

#include "pdpmf/rng.hpp"

#include <cmath>

namespace pdpmf {

std::vector<double> sample_unit_vector(int dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double nrm = 0.0;
  do {
    nrm = 0.0;
    for (int k = 0; k < dim; ++k) {
      v[k] = gauss(rng);
      nrm += v[k] * v[k];
    }
  } while (nrm == 0.0);
  nrm = std::sqrt(nrm);
  for (double& x : v) x /= nrm;
  return v;
}

}  // namespace pdpmf
