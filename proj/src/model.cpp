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

#include "pdpmf/model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pdpmf/errors.hpp"

namespace pdpmf {

const char* privacy_mode_name(PrivacyMode mode) {
  switch (mode) {
    case PrivacyMode::kPlain: return "plain";
    case PrivacyMode::kDp: return "dp";
    case PrivacyMode::kPdp: return "pdp";
  }
  return "?";
}

PrivacyMode privacy_mode_from_name(const std::string& name) {
  if (name == "plain") return PrivacyMode::kPlain;
  if (name == "dp") return PrivacyMode::kDp;
  if (name == "pdp") return PrivacyMode::kPdp;
  throw ValidationError("unknown privacy mode: " + name);
}

double predict(const FactorModel& model, int user, int item) {
  if (user < 0 || user >= model.num_users())
    throw DimensionError("user index " + std::to_string(user) + " out of range");
  if (item < 0 || item >= model.num_items())
    throw DimensionError("item index " + std::to_string(item) + " out of range");
  double p = dot(model.user_profiles.col(user), model.item_profiles.col(item));
  return std::clamp(p, model.rating_min, model.rating_max);
}

namespace {

void write_profile_section(std::ostream& out, const char* tag, const VecArray& m) {
  out << tag << "," << m.dim << "," << m.count << "\n";
  char buf[32];
  for (int i = 0; i < m.count; ++i) {
    auto c = m.col(i);
    for (int k = 0; k < m.dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", c[k]);
      out << (k ? "," : "") << buf;
    }
    out << "\n";
  }
}

VecArray read_profile_section(std::istream& in, const std::string& header,
                              const char* tag, std::size_t& line_no) {
  std::istringstream h(header);
  std::string t, ds, cs;
  if (!std::getline(h, t, ',') || !std::getline(h, ds, ',') || !std::getline(h, cs) ||
      t != tag)
    throw ParseError("model file: expected '" + std::string(tag) +
                     ",d,count' header at line " + std::to_string(line_no));
  VecArray m(std::stoi(ds), std::stoi(cs));
  std::string line;
  for (int i = 0; i < m.count; ++i) {
    if (!std::getline(in, line))
      throw ParseError("model file: truncated " + std::string(tag) + " section");
    ++line_no;
    std::istringstream ls(line);
    std::string field;
    auto col = m.col(i);
    for (int k = 0; k < m.dim; ++k) {
      if (!std::getline(ls, field, ','))
        throw ParseError("model file: short row at line " + std::to_string(line_no));
      col[k] = std::stod(field);
    }
  }
  return m;
}

}  // namespace

void save_model(const std::string& path, const FactorModel& model) {
  std::ostringstream out;
  out << "# pdpmf model\n";
  out << "mode," << privacy_mode_name(model.mode) << "\n";
  out << "publishable," << (model.user_profiles_publishable() ? "all" : "V-only") << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", model.rating_min);
  out << "rating_min," << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", model.rating_max);
  out << "rating_max," << buf << "\n";
  if (model.user_profiles_publishable())
    write_profile_section(out, "U", model.user_profiles);
  write_profile_section(out, "V", model.item_profiles);

  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << out.str();
  if (!f) throw Error("failed writing " + path);
}

FactorModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  FactorModel model;
  std::string line;
  std::size_t line_no = 0;
  bool have_v = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    std::getline(ls, key, ',');
    std::string rest;
    std::getline(ls, rest);
    if (key == "mode") {
      model.mode = privacy_mode_from_name(rest);
    } else if (key == "publishable") {
      // informational; derived from mode
    } else if (key == "rating_min") {
      model.rating_min = std::stod(rest);
    } else if (key == "rating_max") {
      model.rating_max = std::stod(rest);
    } else if (key == "U") {
      model.user_profiles = read_profile_section(in, line, "U", line_no);
      model.d = model.user_profiles.dim;
    } else if (key == "V") {
      model.item_profiles = read_profile_section(in, line, "V", line_no);
      model.d = model.item_profiles.dim;
      have_v = true;
    } else {
      throw ParseError("model file: unknown section '" + key + "' at line " +
                       std::to_string(line_no));
    }
  }
  if (!have_v) throw ParseError("model file has no item profile section: " + path);
  if (model.user_profiles.count > 0 && model.user_profiles.dim != model.item_profiles.dim)
    throw DimensionError("model file: U and V dimension mismatch");
  return model;
}

}  // namespace pdpmf
