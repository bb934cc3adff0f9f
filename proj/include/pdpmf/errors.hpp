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

#include <stdexcept>
#include <string>

namespace pdpmf {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (dataset, model, spec, config). Messages carry the
// offending line number where one exists.
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input that violates a documented invariant
// (rating out of range, duplicate entry, bad fractions, ...).
struct ValidationError : Error {
  using Error::Error;
};

// Mismatched matrix/vector dimensions between related objects.
struct DimensionError : Error {
  using Error::Error;
};

// Training objective became non-finite or exceeded the divergence bound.
struct DivergenceError : Error {
  using Error::Error;
};

// Attempt to release data that privacy policy forbids (user profiles of a
// privately trained model).
struct PrivacyPolicyError : Error {
  using Error::Error;
};

// Bad command line / config-file combination.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pdpmf
