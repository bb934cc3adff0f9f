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

#include "pdpmf/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "pdpmf/errors.hpp"
#include "pdpmf/rng.hpp"

namespace pdpmf {

namespace {

std::string entry_pair(const RatingEntry& e) {
  return "(" + std::to_string(e.user) + ", " + std::to_string(e.item) + ")";
}

}  // namespace

SparseRatings::SparseRatings(int num_users, int num_items,
                             std::vector<RatingEntry> entries,
                             double rating_min, double rating_max)
    : num_users_(num_users),
      num_items_(num_items),
      rating_min_(rating_min),
      rating_max_(rating_max),
      entries_(std::move(entries)) {
  if (num_users_ < 0 || num_items_ < 0)
    throw ValidationError("negative matrix dimensions");
  if (!(rating_min_ > 0.0))
    throw ValidationError("rating_min must be positive (zero is reserved for unrated cells)");
  if (!(rating_min_ <= rating_max_))
    throw ValidationError("rating_min must not exceed rating_max");

  for (const RatingEntry& e : entries_) {
    if (e.user < 0 || e.user >= num_users_ || e.item < 0 || e.item >= num_items_)
      throw ValidationError("rating entry " + entry_pair(e) + " out of range for " +
                            std::to_string(num_users_) + "x" + std::to_string(num_items_));
    if (!std::isfinite(e.value) || e.value < rating_min_ || e.value > rating_max_)
      throw ValidationError("rating value " + std::to_string(e.value) + " at " +
                            entry_pair(e) + " outside [" + std::to_string(rating_min_) +
                            ", " + std::to_string(rating_max_) + "]");
  }

  const std::size_t n = entries_.size();
  std::vector<std::uint32_t> by_user(n), by_item(n);
  std::iota(by_user.begin(), by_user.end(), 0u);
  std::iota(by_item.begin(), by_item.end(), 0u);
  std::sort(by_user.begin(), by_user.end(), [this](std::uint32_t a, std::uint32_t b) {
    const auto& x = entries_[a];
    const auto& y = entries_[b];
    return x.user != y.user ? x.user < y.user : x.item < y.item;
  });
  std::sort(by_item.begin(), by_item.end(), [this](std::uint32_t a, std::uint32_t b) {
    const auto& x = entries_[a];
    const auto& y = entries_[b];
    return x.item != y.item ? x.item < y.item : x.user < y.user;
  });

  for (std::size_t k = 1; k < n; ++k) {
    const auto& a = entries_[by_user[k - 1]];
    const auto& b = entries_[by_user[k]];
    if (a.user == b.user && a.item == b.item)
      throw ValidationError("duplicate rating for pair " + entry_pair(a));
  }

  user_ptr_.assign(num_users_ + 1, 0);
  item_ptr_.assign(num_items_ + 1, 0);
  for (const RatingEntry& e : entries_) {
    ++user_ptr_[e.user + 1];
    ++item_ptr_[e.item + 1];
  }
  for (int i = 0; i < num_users_; ++i) user_ptr_[i + 1] += user_ptr_[i];
  for (int j = 0; j < num_items_; ++j) item_ptr_[j + 1] += item_ptr_[j];
  user_adj_ = std::move(by_user);
  item_adj_ = std::move(by_item);
}

ParsedRatings parse_movielens(const std::string& path, MovielensFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ratings file: " + path);

  const std::string sep = format == MovielensFormat::kTabSeparated ? "\t" : "::";
  std::unordered_map<long long, int> user_index, item_index;
  IdMap ids;
  std::vector<RatingEntry> entries;
  std::string line;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      std::size_t next = line.find(sep, pos);
      if (next == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, next - pos));
      pos = next + sep.size();
    }
    if (fields.size() != 4) fail("expected user" + sep + "item" + sep + "rating" +
                                 sep + "timestamp, got " +
                                 std::to_string(fields.size()) + " fields");

    long long raw_user = 0, raw_item = 0;
    double rating = 0.0;
    try {
      std::size_t used = 0;
      raw_user = std::stoll(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("");
      raw_item = std::stoll(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("");
      rating = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("");
      (void)std::stoll(fields[3]);  // timestamp: validated, then discarded
    } catch (const std::exception&) {
      fail("malformed field in line '" + line + "'");
    }
    if (!std::isfinite(rating) || rating < 1.0 || rating > 5.0)
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": rating " + fields[2] + " outside [1, 5]");

    auto [uit, unew] = user_index.try_emplace(raw_user, static_cast<int>(ids.user_ids.size()));
    if (unew) ids.user_ids.push_back(raw_user);
    auto [iit, inew] = item_index.try_emplace(raw_item, static_cast<int>(ids.item_ids.size()));
    if (inew) ids.item_ids.push_back(raw_item);
    entries.push_back({uit->second, iit->second, rating});
  }

  SparseRatings ratings(static_cast<int>(ids.user_ids.size()),
                        static_cast<int>(ids.item_ids.size()),
                        std::move(entries), 1.0, 5.0);
  return {std::move(ratings), std::move(ids)};
}

void write_ratings_tsv(const std::string& path, const SparseRatings& data,
                       const IdMap* ids) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[96];
  for (const RatingEntry& e : data.entries()) {
    long long u = ids ? ids->user_ids[e.user] : e.user;
    long long i = ids ? ids->item_ids[e.item] : e.item;
    std::snprintf(buf, sizeof buf, "%lld\t%lld\t%.17g\t0\n", u, i, e.value);
    out << buf;
  }
  if (!out) throw Error("failed writing " + path);
}

FoldSplit split_folds(const SparseRatings& data, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("fold count must be at least 2");
  if (static_cast<std::size_t>(k) > data.size())
    throw ValidationError("fold count " + std::to_string(k) + " exceeds entry count " +
                          std::to_string(data.size()));
  const std::size_t n = data.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(derive_seed(seed, {stream::kFoldSplit}));
  std::shuffle(order.begin(), order.end(), rng);

  FoldSplit split;
  split.fold_count = k;
  split.assignment.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    split.assignment[order[pos]] = static_cast<int>(pos % k);
  return split;
}

namespace {

SparseRatings fold_subset(const SparseRatings& data, const FoldSplit& split,
                          int fold, bool keep_fold) {
  if (split.assignment.size() != data.size())
    throw ValidationError("fold split does not match data");
  if (fold < 0 || fold >= split.fold_count)
    throw ValidationError("fold index out of range");
  std::vector<RatingEntry> entries;
  for (std::size_t k = 0; k < data.size(); ++k)
    if ((split.assignment[k] == fold) == keep_fold) entries.push_back(data.entries()[k]);
  return SparseRatings(data.num_users(), data.num_items(), std::move(entries),
                       data.rating_min(), data.rating_max());
}

}  // namespace

SparseRatings fold_train(const SparseRatings& data, const FoldSplit& split, int fold) {
  return fold_subset(data, split, fold, false);
}

SparseRatings fold_test(const SparseRatings& data, const FoldSplit& split, int fold) {
  return fold_subset(data, split, fold, true);
}

SynthInstance synth_lowrank(int n, int m, int d, double density, std::uint64_t seed) {
  if (n < 1 || m < 1 || d < 1 || d > std::min(n, m))
    throw ValidationError("degenerate synthetic dimensions");
  if (!(density > 0.0) || density > 1.0)
    throw ValidationError("density must be in (0, 1]");

  FactorModel truth;
  truth.d = d;
  truth.user_profiles = VecArray(d, n);
  truth.item_profiles = VecArray(d, m);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {stream::kSynth, stream::kUserInit, static_cast<std::uint64_t>(i)}));
    auto u = sample_unit_vector(d, rng);
    std::copy(u.begin(), u.end(), truth.user_profiles.col(i).begin());
  }
  for (int j = 0; j < m; ++j) {
    Rng rng(derive_seed(seed, {stream::kSynth, stream::kItemInit, static_cast<std::uint64_t>(j)}));
    auto v = sample_unit_vector(d, rng);
    std::copy(v.begin(), v.end(), truth.item_profiles.col(j).begin());
  }

  const std::size_t cells = static_cast<std::size_t>(n) * m;
  std::vector<double> products(cells);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      double p = dot(truth.user_profiles.col(i), truth.item_profiles.col(j));
      products[static_cast<std::size_t>(i) * m + j] = p;
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  if (!(hi - lo > 1e-12))
    throw ValidationError("synthetic products are degenerate (constant matrix)");

  SynthInstance out;
  out.scale = 4.0 / (hi - lo);
  out.offset = 1.0 - lo * out.scale;

  const auto count = static_cast<std::size_t>(std::llround(density * static_cast<double>(cells)));
  std::vector<std::uint64_t> cell_ids(cells);
  std::iota(cell_ids.begin(), cell_ids.end(), 0u);
  Rng rng(derive_seed(seed, {stream::kSynth, stream::kSample}));
  std::shuffle(cell_ids.begin(), cell_ids.end(), rng);
  cell_ids.resize(std::max<std::size_t>(count, 0));
  std::sort(cell_ids.begin(), cell_ids.end());

  std::vector<RatingEntry> entries;
  entries.reserve(cell_ids.size());
  for (std::uint64_t c : cell_ids) {
    int i = static_cast<int>(c / m), j = static_cast<int>(c % m);
    double r = out.scale * products[c] + out.offset;
    r = std::clamp(r, 1.0, 5.0);  // affine map can overshoot by rounding
    entries.push_back({i, j, r});
  }
  out.ratings = SparseRatings(n, m, std::move(entries), 1.0, 5.0);
  truth.rating_min = 1.0;
  truth.rating_max = 5.0;
  out.truth = std::move(truth);
  return out;
}

}  // namespace pdpmf
