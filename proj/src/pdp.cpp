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

#include "pdpmf/pdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "pdpmf/errors.hpp"

namespace pdpmf {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

bool PrivacySpecification::covered() const {
  for (double e : epsilons)
    if (std::isnan(e)) return false;
  return true;
}

void PrivacySpecification::validate() const {
  for (double e : epsilons)
    if (!std::isnan(e) && !(e > 0.0))
      throw ValidationError("privacy budgets must be positive");
}

void GroupSpecParams::validate() const {
  if (f_c < 0.0 || f_m < 0.0 || f_c + f_m > 1.0)
    throw ValidationError("group fractions must be non-negative with f_c + f_m <= 1");
  if (!(eps_c > 0.0) || !(eps_c < eps_m) || !(eps_m < eps_l))
    throw ValidationError("group budget breakpoints must satisfy 0 < eps_c < eps_m < eps_l");
}

PrivacySpecification generate_spec(const SparseRatings& data,
                                   const GroupSpecParams& params) {
  params.validate();
  PrivacySpecification spec;
  spec.default_epsilon = params.eps_l;
  spec.epsilons.resize(data.size());
  Rng rng(derive_seed(params.seed, {stream::kSpecGen}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& e : spec.epsilons) {
    double g = unit(rng);
    if (g < params.f_c) {
      e = params.eps_c + (params.eps_m - params.eps_c) * unit(rng);
    } else if (g < params.f_c + params.f_m) {
      e = params.eps_m + (params.eps_l - params.eps_m) * unit(rng);
    } else {
      e = params.eps_l;
    }
  }
  return spec;
}

void save_spec(const std::string& path, const SparseRatings& data,
               const PrivacySpecification& spec) {
  if (spec.size() != data.size())
    throw ValidationError("privacy specification does not match data size");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "user,item,epsilon\n";
  char buf[32];
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (std::isnan(spec.epsilons[k])) continue;
    const RatingEntry& e = data.entries()[k];
    std::snprintf(buf, sizeof buf, "%.17g", spec.epsilons[k]);
    out << e.user << "," << e.item << "," << buf << "\n";
  }
  if (!out) throw Error("failed writing " + path);
}

PrivacySpecification load_spec(const std::string& path, const SparseRatings& data) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open privacy spec file: " + path);

  std::unordered_map<std::uint64_t, std::size_t> entry_at;
  entry_at.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const RatingEntry& e = data.entries()[k];
    entry_at.emplace((static_cast<std::uint64_t>(e.user) << 32) |
                         static_cast<std::uint32_t>(e.item),
                     k);
  }

  PrivacySpecification spec;
  spec.epsilons.assign(data.size(), kNaN);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "user,item,epsilon" || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string us, is, es;
    if (!std::getline(ls, us, ',') || !std::getline(ls, is, ',') || !std::getline(ls, es))
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected user,item,epsilon");
    int u = 0, i = 0;
    double e = 0.0;
    try {
      u = std::stoi(us);
      i = std::stoi(is);
      e = std::stod(es);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed row '" + line + "'");
    }
    if (!(e > 0.0))
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": privacy budget must be positive");
    auto it = entry_at.find((static_cast<std::uint64_t>(u) << 32) |
                            static_cast<std::uint32_t>(i));
    if (it == entry_at.end())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": pair (" + us + ", " +
                            is + ") has no observed rating");
    if (!std::isnan(spec.epsilons[it->second]))
      throw ValidationError(path + ":" + std::to_string(line_no) + ": duplicate budget for (" +
                            us + ", " + is + ")");
    spec.epsilons[it->second] = e;
  }
  return spec;
}

ThresholdPolicy ThresholdPolicy::max() { return {Kind::kMax, 0.0}; }
ThresholdPolicy ThresholdPolicy::mean() { return {Kind::kMean, 0.0}; }
ThresholdPolicy ThresholdPolicy::fixed(double value) { return {Kind::kFixed, value}; }

std::string ThresholdPolicy::describe() const {
  switch (kind) {
    case Kind::kMax: return "max";
    case Kind::kMean: return "mean";
    case Kind::kFixed: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "fixed(%.17g)", fixed_value);
      return buf;
    }
  }
  return "?";
}

namespace {

std::pair<double, double> epsilon_range(const PrivacySpecification& spec) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double e : spec.epsilons) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  return {lo, hi};
}

void require_covered(const PrivacySpecification& spec) {
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (std::isnan(spec.epsilons[k]))
      throw ValidationError("privacy specification does not cover entry " +
                            std::to_string(k));
}

}  // namespace

double resolve_threshold(const PrivacySpecification& spec,
                         const ThresholdPolicy& policy) {
  if (spec.size() == 0)
    throw ValidationError("cannot resolve a threshold from an empty specification");
  require_covered(spec);
  spec.validate();
  auto [lo, hi] = epsilon_range(spec);
  switch (policy.kind) {
    case ThresholdPolicy::Kind::kMax:
      return hi;
    case ThresholdPolicy::Kind::kMean: {
      double s = 0.0;
      for (double e : spec.epsilons) s += e;
      double t = s / static_cast<double>(spec.size());
      // Guard against summation rounding pushing the mean past an endpoint.
      return std::clamp(t, lo, hi);
    }
    case ThresholdPolicy::Kind::kFixed:
      if (policy.fixed_value < lo || policy.fixed_value > hi)
        throw ValidationError("fixed threshold " + std::to_string(policy.fixed_value) +
                              " outside the specification range [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
      return policy.fixed_value;
  }
  throw ValidationError("unknown threshold policy");
}

double keep_probability(double eps_ij, double t) {
  if (t > eps_ij) return std::expm1(eps_ij) / std::expm1(t);
  return 1.0;
}

SparseRatings sample_ratings(const SparseRatings& data,
                             const PrivacySpecification& spec, double t,
                             std::uint64_t seed) {
  if (spec.size() != data.size())
    throw ValidationError("privacy specification does not match data size");
  require_covered(spec);
  spec.validate();
  auto [lo, hi] = epsilon_range(spec);
  const double slack = 1e-12 * std::max(1.0, hi);
  if (t < lo - slack || t > hi + slack)
    throw ValidationError("sampling threshold " + std::to_string(t) +
                          " outside [min eps, max eps] = [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");

  std::vector<RatingEntry> kept;
  kept.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    double pi = keep_probability(spec.epsilons[k], t);
    double u = unit_uniform(derive_seed(seed, {stream::kSample, k}));
    if (u < pi) kept.push_back(data.entries()[k]);
  }
  return SparseRatings(data.num_users(), data.num_items(), std::move(kept),
                       data.rating_min(), data.rating_max());
}

PdpRunResult run_pdp_pmf(const SparseRatings& data,
                         const PrivacySpecification& spec,
                         const ThresholdPolicy& policy, const TrainConfig& cfg,
                         SensitivityMode smode, NoiseMode nmode) {
  PdpRunResult out;
  out.threshold = resolve_threshold(spec, policy);
  SparseRatings sampled = sample_ratings(data, spec, out.threshold, cfg.seed);
  out.sampled_size = sampled.size();
  out.model = run_dp_pmf(sampled, out.threshold, cfg, smode, nmode);
  out.model.mode = PrivacyMode::kPdp;
  return out;
}

}  // namespace pdpmf
