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
#include <initializer_list>
#include <random>
#include <vector>

namespace pdpmf {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to mix seed material.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and a tag path.
// Every random decision in the library draws from a stream keyed this way,
// so adding experiment cells never perturbs existing ones and per-entity
// work can run in parallel while staying reproducible.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t t : tags) s = mix64(s ^ t);
  return s;
}

// Stream tags. Values are arbitrary but frozen: changing them changes every
// seeded result.
namespace stream {
inline constexpr std::uint64_t kUserInit = 0x75736572u;   // phase-1 U init
inline constexpr std::uint64_t kItemInit = 0x6974656du;   // phase-1 V init
inline constexpr std::uint64_t kNoise = 0x6e6f6973u;      // objective noise
inline constexpr std::uint64_t kSample = 0x73616d70u;     // rating sampling
inline constexpr std::uint64_t kSpecGen = 0x73706563u;    // privacy spec gen
inline constexpr std::uint64_t kFoldSplit = 0x666f6c64u;  // CV fold split
inline constexpr std::uint64_t kCell = 0x63656c6cu;       // experiment cell
inline constexpr std::uint64_t kSynth = 0x73796e74u;      // synthetic data
}  // namespace stream

// Uniform double in [0, 1) from one mixed 64-bit key. Used for per-entry
// Bernoulli decisions that must not depend on iteration order.
inline double unit_uniform(std::uint64_t key) {
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

// Uniformly random point on the unit sphere in `dim` dimensions.
std::vector<double> sample_unit_vector(int dim, Rng& rng);

}  // namespace pdpmf
