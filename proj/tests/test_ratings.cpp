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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <tuple>

#include "doctest.h"
#include "pdpmf/errors.hpp"
#include "pdpmf/ratings.hpp"
#include "test_util.hpp"

using namespace pdpmf;
using testutil::make_temp_dir;
using testutil::write_text;

TEST_SUITE_BEGIN("unit");

TEST_CASE("parse tab-separated ratings with dense re-indexing") {
  std::string dir = make_temp_dir("parse");
  std::string path = dir + "/u.data";
  write_text(path,
             "196\t242\t3\t881250949\n"
             "186\t302\t3\t891717742\n"
             "196\t377\t1\t878887116\n"
             "22\t377\t5\t878887116\n");
  ParsedRatings parsed = parse_movielens(path, MovielensFormat::kTabSeparated);
  CHECK(parsed.ratings.num_users() == 3);
  CHECK(parsed.ratings.num_items() == 3);
  CHECK(parsed.ratings.size() == 4);
  CHECK(parsed.ratings.rating_min() == 1.0);
  CHECK(parsed.ratings.rating_max() == 5.0);
  // First-appearance order: 196 -> 0, 186 -> 1, 22 -> 2.
  CHECK(parsed.ids.user_ids == std::vector<long long>{196, 186, 22});
  CHECK(parsed.ids.item_ids == std::vector<long long>{242, 302, 377});
  CHECK(parsed.ratings.entries()[3].user == 2);
  CHECK(parsed.ratings.entries()[3].item == 2);
  CHECK(parsed.ratings.entries()[3].value == 5.0);
}

TEST_CASE("parse double-colon format") {
  std::string dir = make_temp_dir("parse1m");
  std::string path = dir + "/ratings.dat";
  write_text(path, "1::1193::5::978300760\n1::661::3::978302109\n");
  ParsedRatings parsed = parse_movielens(path, MovielensFormat::kDoubleColon);
  CHECK(parsed.ratings.size() == 2);
  CHECK(parsed.ratings.num_users() == 1);
  CHECK(parsed.ratings.num_items() == 2);
}

TEST_CASE("parse errors carry line numbers") {
  std::string dir = make_temp_dir("parsebad");

  SUBCASE("malformed line") {
    write_text(dir + "/a", "1\t2\t3\t4\nnot-a-line\n");
    CHECK_THROWS_WITH_AS(parse_movielens(dir + "/a", MovielensFormat::kTabSeparated),
                         doctest::Contains(":2:"), ParseError);
  }
  SUBCASE("wrong field count") {
    write_text(dir + "/b", "1\t2\t3\n");
    CHECK_THROWS_AS(parse_movielens(dir + "/b", MovielensFormat::kTabSeparated),
                    ParseError);
  }
  SUBCASE("rating outside [1,5]") {
    write_text(dir + "/c", "1\t2\t6\t0\n");
    CHECK_THROWS_AS(parse_movielens(dir + "/c", MovielensFormat::kTabSeparated),
                    ValidationError);
  }
  SUBCASE("duplicate pair") {
    write_text(dir + "/d", "1\t2\t3\t0\n1\t2\t4\t0\n");
    CHECK_THROWS_WITH_AS(parse_movielens(dir + "/d", MovielensFormat::kTabSeparated),
                         doctest::Contains("duplicate"), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_movielens(dir + "/nope", MovielensFormat::kTabSeparated),
                    ParseError);
  }
}

TEST_CASE("empty file parses to zero entries") {
  std::string dir = make_temp_dir("parseempty");
  write_text(dir + "/e", "");
  ParsedRatings parsed = parse_movielens(dir + "/e", MovielensFormat::kTabSeparated);
  CHECK(parsed.ratings.size() == 0);
  CHECK(parsed.ratings.num_users() == 0);
}

// Conditional on the real dataset being present.
TEST_CASE("ml-100k shape when available") {
  const char* path = std::getenv("PDPMF_ML100K");
  if (!path || !*path) {
    MESSAGE("PDPMF_ML100K not set; skipping real-dataset check");
    return;
  }
  ParsedRatings parsed = parse_movielens(path, MovielensFormat::kTabSeparated);
  CHECK(parsed.ratings.num_users() == 943);
  CHECK(parsed.ratings.num_items() == 1682);
  CHECK(parsed.ratings.size() == 100000);
}

TEST_CASE("construction invariants") {
  CHECK_THROWS_AS(SparseRatings(2, 2, {{0, 0, 3.0}, {0, 0, 4.0}}), ValidationError);
  CHECK_THROWS_AS(SparseRatings(2, 2, {{2, 0, 3.0}}), ValidationError);
  CHECK_THROWS_AS(SparseRatings(2, 2, {{0, 0, 0.5}}), ValidationError);
  CHECK_THROWS_AS(SparseRatings(2, 2, {{0, 0, 3.0}}, 0.0, 5.0), ValidationError);

  SparseRatings r(3, 2, {{2, 1, 4.0}, {0, 0, 1.0}, {2, 0, 5.0}});
  CHECK(r.user_entries(2).size() == 2);
  CHECK(r.user_entries(1).size() == 0);
  CHECK(r.item_entries(0).size() == 2);
  // adjacency sorted by counterpart index
  CHECK(r.entries()[r.user_entries(2)[0]].item == 0);
  CHECK(r.entries()[r.user_entries(2)[1]].item == 1);
}

TEST_CASE("tsv round-trip preserves the entry multiset") {
  SparseRatings data(5, 4,
                     {{4, 0, 2.0}, {1, 3, 4.5}, {0, 0, 1.0}, {2, 1, 5.0}, {4, 3, 3.0}});
  std::string dir = make_temp_dir("roundtrip");
  std::string path = dir + "/out.tsv";
  write_ratings_tsv(path, data);
  ParsedRatings parsed = parse_movielens(path, MovielensFormat::kTabSeparated);
  REQUIRE(parsed.ratings.size() == data.size());

  using Key = std::tuple<long long, long long, double>;
  std::multiset<Key> before, after;
  for (const auto& e : data.entries()) before.insert({e.user, e.item, e.value});
  for (const auto& e : parsed.ratings.entries())
    after.insert({parsed.ids.user_ids[e.user], parsed.ids.item_ids[e.item], e.value});
  CHECK(before == after);
}

TEST_CASE("fold split is balanced, disjoint and exhaustive") {
  std::vector<RatingEntry> entries;
  for (int i = 0; i < 101; ++i) entries.push_back({i / 20, i % 20, 1.0 + i % 5});
  SparseRatings data(6, 20, std::move(entries));

  FoldSplit split = split_folds(data, 10, 7);
  REQUIRE(split.assignment.size() == 101);
  std::vector<int> sizes(10, 0);
  for (int f : split.assignment) {
    REQUIRE(f >= 0);
    REQUIRE(f < 10);
    ++sizes[f];
  }
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes.front() == 10);
  CHECK(sizes.back() == 11);  // 101 = 9 folds of 10 + one of 11

  SUBCASE("train/test partition the data") {
    SparseRatings train = fold_train(data, split, 3);
    SparseRatings test = fold_test(data, split, 3);
    CHECK(train.size() + test.size() == data.size());
    CHECK(train.num_users() == data.num_users());
    std::set<std::pair<int, int>> train_pairs, test_pairs;
    for (const auto& e : train.entries()) train_pairs.insert({e.user, e.item});
    for (const auto& e : test.entries()) test_pairs.insert({e.user, e.item});
    for (const auto& p : test_pairs) CHECK(train_pairs.count(p) == 0);
  }

  SUBCASE("deterministic given seed") {
    FoldSplit again = split_folds(data, 10, 7);
    CHECK(split.assignment == again.assignment);
    FoldSplit other = split_folds(data, 10, 8);
    CHECK(split.assignment != other.assignment);
  }
}

TEST_CASE("fold split of 100 entries into 10 folds of exactly 10") {
  std::vector<RatingEntry> entries;
  for (int i = 0; i < 100; ++i) entries.push_back({i / 20, i % 20, 3.0});
  SparseRatings data(5, 20, std::move(entries));
  FoldSplit split = split_folds(data, 10, 1);
  std::vector<int> sizes(10, 0);
  for (int f : split.assignment) ++sizes[f];
  for (int s : sizes) CHECK(s == 10);
}

TEST_CASE("fold split rejects bad fold counts") {
  SparseRatings data(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}});
  CHECK_THROWS_AS(split_folds(data, 1, 0), ValidationError);
  CHECK_THROWS_AS(split_folds(data, 3, 0), ValidationError);
}

TEST_CASE("synth_lowrank counts, range and determinism") {
  SynthInstance inst = synth_lowrank(50, 40, 5, 0.3, 7);
  CHECK(inst.ratings.size() == 600);  // round(0.3 * 50 * 40)
  for (const auto& e : inst.ratings.entries()) {
    CHECK(e.value >= 1.0);
    CHECK(e.value <= 5.0);
  }
  SynthInstance again = synth_lowrank(50, 40, 5, 0.3, 7);
  REQUIRE(inst.ratings.size() == again.ratings.size());
  for (std::size_t k = 0; k < inst.ratings.size(); ++k) {
    CHECK(inst.ratings.entries()[k].user == again.ratings.entries()[k].user);
    CHECK(inst.ratings.entries()[k].item == again.ratings.entries()[k].item);
    CHECK(inst.ratings.entries()[k].value == again.ratings.entries()[k].value);
  }
}

TEST_CASE("synth_lowrank at density 1 reproduces ratings from the truth model") {
  SynthInstance inst = synth_lowrank(20, 25, 4, 1.0, 3);
  CHECK(inst.ratings.size() == 500);
  for (const auto& e : inst.ratings.entries()) {
    double p = dot(inst.truth.user_profiles.col(e.user),
                   inst.truth.item_profiles.col(e.item));
    CHECK(std::abs((e.value - inst.offset) / inst.scale - p) < 1e-9);
  }
}

TEST_CASE("synth_lowrank rejects degenerate requests") {
  CHECK_THROWS_AS(synth_lowrank(5, 4, 6, 0.5, 0), ValidationError);
  CHECK_THROWS_AS(synth_lowrank(5, 4, 2, 0.0, 0), ValidationError);
  CHECK_THROWS_AS(synth_lowrank(5, 4, 2, 1.5, 0), ValidationError);
}

TEST_CASE("model csv round-trips exactly") {
  SynthInstance inst = synth_lowrank(9, 7, 3, 1.0, 5);
  std::string dir = make_temp_dir("model");

  SUBCASE("plain models keep both matrices") {
    save_model(dir + "/truth.csv", inst.truth);  // ground truth, inspectable
    FactorModel loaded = load_model(dir + "/truth.csv");
    CHECK(loaded.mode == PrivacyMode::kPlain);
    CHECK(loaded.d == 3);
    CHECK(loaded.user_profiles.data == inst.truth.user_profiles.data);
    CHECK(loaded.item_profiles.data == inst.truth.item_profiles.data);
    CHECK(loaded.rating_min == inst.truth.rating_min);
    CHECK(loaded.rating_max == inst.truth.rating_max);
  }

  SUBCASE("private models persist item profiles only") {
    FactorModel priv = inst.truth;
    priv.mode = PrivacyMode::kPdp;
    save_model(dir + "/priv.csv", priv);
    FactorModel loaded = load_model(dir + "/priv.csv");
    CHECK(loaded.mode == PrivacyMode::kPdp);
    CHECK(loaded.user_profiles.count == 0);
    CHECK(loaded.item_profiles.data == priv.item_profiles.data);
  }

  SUBCASE("truncated files are rejected") {
    write_text(dir + "/bad.csv", "mode,plain\nV,3,5\n1,2,3\n");
    CHECK_THROWS_AS(load_model(dir + "/bad.csv"), ParseError);
  }
}

TEST_SUITE_END();
