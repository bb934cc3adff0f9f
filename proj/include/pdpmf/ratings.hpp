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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdpmf/model.hpp"

namespace pdpmf {

struct RatingEntry {
  int user = 0;
  int item = 0;
  double value = 0.0;
};

// Observed (user, item, rating) triples over an N x M grid. Zero never
// appears as a rating value: absent cells mean "unrated", and the valid
// range has rating_min > 0.
//
// Read-only after construction; safe to share across concurrent training
// runs. The per-user / per-item adjacency (CSR over entry indices, sorted
// by counterpart index) makes gradient accumulation order independent of
// the order entries were supplied in.
class SparseRatings {
 public:
  SparseRatings() = default;

  // Validates invariants (index ranges, rating range, uniqueness of
  // (user, item) pairs) and builds adjacency. Throws ValidationError.
  SparseRatings(int num_users, int num_items, std::vector<RatingEntry> entries,
                double rating_min = 1.0, double rating_max = 5.0);

  int num_users() const { return num_users_; }
  int num_items() const { return num_items_; }
  double rating_min() const { return rating_min_; }
  double rating_max() const { return rating_max_; }
  const std::vector<RatingEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Entry indices of one user's (or item's) ratings, sorted by the
  // counterpart index.
  std::span<const std::uint32_t> user_entries(int user) const {
    return {user_adj_.data() + user_ptr_[user],
            user_ptr_[user + 1] - user_ptr_[user]};
  }
  std::span<const std::uint32_t> item_entries(int item) const {
    return {item_adj_.data() + item_ptr_[item],
            item_ptr_[item + 1] - item_ptr_[item]};
  }

 private:
  int num_users_ = 0;
  int num_items_ = 0;
  double rating_min_ = 1.0;
  double rating_max_ = 5.0;
  std::vector<RatingEntry> entries_;
  std::vector<std::size_t> user_ptr_, item_ptr_;
  std::vector<std::uint32_t> user_adj_, item_adj_;
};

// Dense-index -> raw-dataset-id maps retained from parsing, for reporting.
struct IdMap {
  std::vector<long long> user_ids;
  std::vector<long long> item_ids;
};

struct ParsedRatings {
  SparseRatings ratings;
  IdMap ids;
};

enum class MovielensFormat {
  kTabSeparated,  // user<TAB>item<TAB>rating<TAB>timestamp
  kDoubleColon,   // user::item::rating::timestamp
};

// Reads a MovieLens-style ratings file. Raw ids are mapped to dense 0-based
// indices in order of first appearance; timestamps are parsed and discarded.
// The rating range is fixed to [1, 5] and enforced.
ParsedRatings parse_movielens(const std::string& path, MovielensFormat format);

// Writes entries as `user<TAB>item<TAB>rating<TAB>0` lines. When `ids` is
// given, raw ids are written; otherwise dense indices are.
void write_ratings_tsv(const std::string& path, const SparseRatings& data,
                       const IdMap* ids = nullptr);

// Balanced random partition of entries into `fold_count` folds
// (sizes differ by at most one).
struct FoldSplit {
  int fold_count = 0;
  std::vector<int> assignment;  // per-entry fold label
};

FoldSplit split_folds(const SparseRatings& data, int k, std::uint64_t seed);

// Training/test subsets for one fold. Dimensions are preserved.
SparseRatings fold_train(const SparseRatings& data, const FoldSplit& split,
                         int fold);
SparseRatings fold_test(const SparseRatings& data, const FoldSplit& split,
                        int fold);

// A synthetic instance with known ground truth: random unit profile
// vectors, products affinely rescaled into [1, 5], then a `density`
// fraction of cells kept.
//
//   rating(i, j) = scale * dot(u_i, v_j) + offset      (exactly)
//
// `truth` carries the generating profiles, so it is both a test oracle and
// a reference model for held-out evaluation.
struct SynthInstance {
  SparseRatings ratings;
  FactorModel truth;
  double scale = 1.0;
  double offset = 0.0;
};

SynthInstance synth_lowrank(int n, int m, int d, double density,
                            std::uint64_t seed);

}  // namespace pdpmf
