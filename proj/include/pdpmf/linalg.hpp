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

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pdpmf {

// A fixed-width array of column vectors, stored contiguously. Profile
// matrices (d x N) and noise matrices (d x M) use this.
struct VecArray {
  int dim = 0;
  int count = 0;
  std::vector<double> data;

  VecArray() = default;
  VecArray(int dim_, int count_)
      : dim(dim_), count(count_),
        data(static_cast<std::size_t>(dim_) * count_, 0.0) {}

  std::span<double> col(int i) {
    return {data.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> col(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

inline void scale(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

inline double squared_norm(std::span<const double> x) { return dot(x, x); }

inline double norm(std::span<const double> x) {
  return std::sqrt(squared_norm(x));
}

}  // namespace pdpmf
