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

#include <string>

#include "pdpmf/linalg.hpp"

namespace pdpmf {

// How a model was trained. Decides what may be released: only a plainly
// trained model may publish user profiles; dp/pdp models publish the
// perturbed item profiles alone and keep U confidential.
enum class PrivacyMode { kPlain, kDp, kPdp };

const char* privacy_mode_name(PrivacyMode mode);
PrivacyMode privacy_mode_from_name(const std::string& name);

// Latent factor model: d-dimensional user profiles u_i (columns of U) and
// item profiles v_j (columns of V). Predictions are dot products clamped
// into the training rating range.
struct FactorModel {
  int d = 0;
  VecArray user_profiles;  // d x N
  VecArray item_profiles;  // d x M
  double rating_min = 1.0;
  double rating_max = 5.0;
  PrivacyMode mode = PrivacyMode::kPlain;

  int num_users() const { return user_profiles.count; }
  int num_items() const { return item_profiles.count; }
  bool user_profiles_publishable() const { return mode == PrivacyMode::kPlain; }
};

// dot(u_i, v_j) clamped into [rating_min, rating_max].
double predict(const FactorModel& model, int user, int item);

// CSV persistence. Private modes write the item section only, so user
// profiles never reach disk for dp/pdp models. Round-trips exactly
// (values serialized with 17 significant digits).
void save_model(const std::string& path, const FactorModel& model);
FactorModel load_model(const std::string& path);

}  // namespace pdpmf
