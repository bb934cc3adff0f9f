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
#include <string>
#include <vector>

#include "pdpmf/dp_pmf.hpp"
#include "pdpmf/ratings.hpp"

namespace pdpmf {

// Per-observed-rating privacy budgets, stored aligned with the entry list
// of the SparseRatings they describe (budgets for unrated pairs are
// meaningless and have no storage). A missing value is NaN and trips a
// coverage error at sampling time.
struct PrivacySpecification {
  std::vector<double> epsilons;      // one per data entry, NaN = missing
  double default_epsilon = 1.0;      // the conventional weak requirement

  std::size_t size() const { return epsilons.size(); }
  bool covered() const;              // true when no budget is missing
  void validate() const;             // throws on non-positive budgets
};

// Three-group random privacy specification: a conservative fraction f_c
// draws budgets uniformly from [eps_c, eps_m), a moderate fraction f_m
// from [eps_m, eps_l), and the remaining liberal records get exactly
// eps_l.
struct GroupSpecParams {
  double f_c = 0.54;
  double f_m = 0.37;
  double eps_c = 0.1;
  double eps_m = 0.2;
  double eps_l = 1.0;
  std::uint64_t seed = 0;

  void validate() const;  // fractions in range, breakpoints increasing
};

PrivacySpecification generate_spec(const SparseRatings& data,
                                   const GroupSpecParams& params);

// Spec CSV (`user,item,epsilon` with dense indices). Loading aligns rows
// to the given data's entries; rows for unknown pairs are rejected.
void save_spec(const std::string& path, const SparseRatings& data,
               const PrivacySpecification& spec);
PrivacySpecification load_spec(const std::string& path,
                               const SparseRatings& data);

// How the uniform budget t of the inner mechanism is chosen. Valid
// thresholds lie within [min eps_ij, max eps_ij]; a fixed value outside
// that range is rejected.
struct ThresholdPolicy {
  enum class Kind { kMax, kMean, kFixed };
  Kind kind = Kind::kMean;
  double fixed_value = 0.0;

  static ThresholdPolicy max();
  static ThresholdPolicy mean();
  static ThresholdPolicy fixed(double value);
  std::string describe() const;
};

double resolve_threshold(const PrivacySpecification& spec,
                         const ThresholdPolicy& policy);

// Keep probability of one rating under threshold t:
//   (e^eps - 1) / (e^t - 1)   if t > eps,  else 1.
double keep_probability(double eps_ij, double t);

// Bernoulli-samples each rating with keep_probability(eps_ij, t); dropped
// ratings leave the entry list (their cells revert to the reserved zero).
// Per-entry derived streams make the decision independent of entry order.
// Throws ValidationError if any rating lacks a budget or t is out of range.
SparseRatings sample_ratings(const SparseRatings& data,
                             const PrivacySpecification& spec, double t,
                             std::uint64_t seed);

struct PdpRunResult {
  FactorModel model;           // item profiles publishable, mode = kPdp
  double threshold = 0.0;      // resolved t
  std::size_t sampled_size = 0;  // |D_s|
};

// The full personalized scheme: resolve t, sample the ratings, then run
// the uniform two-phase scheme on the sampled set with budget t. The
// phase-1 factorization sees only the sampled data.
PdpRunResult run_pdp_pmf(const SparseRatings& data,
                         const PrivacySpecification& spec,
                         const ThresholdPolicy& policy, const TrainConfig& cfg,
                         SensitivityMode smode, NoiseMode nmode);

}  // namespace pdpmf
