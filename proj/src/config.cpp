// Copyright 2026 The cmlab Authors
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

#include "cmlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cmlab/error.hpp"

namespace cmlab {
namespace {

enum class Kind { kU64, kInt, kPositiveReal, kFraction, kRatios, kText };

struct KeySpec {
  std::string_view key;
  std::string_view fallback;
  Kind kind;
  long long lo = 0;
  long long hi = 0;
};

constexpr KeySpec kKeys[] = {
    {"seed", "0", Kind::kU64},
    {"split_ratios", "0.7,0.1,0.2", Kind::kRatios},
    {"disagreement_threshold", "4", Kind::kInt, 0, 8},
    {"swap_pairs", "1", Kind::kInt, 1, 1000},
    {"delete_fraction", "0.1", Kind::kFraction},
    {"ngram_n", "2", Kind::kInt, 2, 4},
    {"hidden_width", "32", Kind::kInt, 1, 4096},
    {"learning_rate", "0.001", Kind::kPositiveReal},
    {"max_epochs", "500", Kind::kInt, 1, 1000000},
    {"patience", "10", Kind::kInt, 1, 1000000},
    {"batch_size", "32", Kind::kInt, 1, 1000000},
    {"rating_bin_width", "0.5", Kind::kPositiveReal},
    {"error_bin_width", "0.25", Kind::kPositiveReal},
    {"report_format", "markdown", Kind::kText},
};

const KeySpec* find_key(std::string_view key) {
  for (const auto& spec : kKeys) {
    if (spec.key == key) return &spec;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::array<double, 3> parse_ratios(std::string_view value) {
  std::array<double, 3> r{};
  std::size_t at = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto comma = value.find(',', at);
    const bool last = k == 2;
    if (last != (comma == std::string_view::npos)) {
      throw ValidationError("split_ratios needs exactly three values");
    }
    const auto field = trim(value.substr(at, last ? value.npos : comma - at));
    if (!parse_number(field, r[k]) || !(r[k] >= 0.0)) {
      throw ValidationError("split_ratios has a bad value '" + field + "'");
    }
    at = comma + 1;
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw ValidationError("split_ratios must sum to 1");
  }
  return r;
}

void check_value(const KeySpec& spec, const std::string& value) {
  const std::string what = std::string(spec.key) + " = '" + value + "'";
  switch (spec.kind) {
    case Kind::kU64: {
      std::uint64_t v = 0;
      if (!parse_number(value, v)) throw ValidationError("bad unsigned " + what);
      break;
    }
    case Kind::kInt: {
      long long v = 0;
      if (!parse_number(value, v) || v < spec.lo || v > spec.hi) {
        throw ValidationError("expected integer in [" + std::to_string(spec.lo) +
                              ", " + std::to_string(spec.hi) + "]: " + what);
      }
      break;
    }
    case Kind::kPositiveReal: {
      double v = 0.0;
      if (!parse_number(value, v) || !(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError("expected positive real: " + what);
      }
      break;
    }
    case Kind::kFraction: {
      double v = 0.0;
      if (!parse_number(value, v) || !(v > 0.0 && v < 1.0)) {
        throw ValidationError("expected real in (0, 1): " + what);
      }
      break;
    }
    case Kind::kRatios:
      parse_ratios(value);
      break;
    case Kind::kText:
      if (value.empty()) throw ValidationError("empty value: " + what);
      break;
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& spec : kKeys) {
    entries_.emplace(std::string(spec.key), std::string(spec.fallback));
  }
}

void RunConfig::set(std::string_view key, std::string value) {
  if (const KeySpec* spec = find_key(key)) {
    check_value(*spec, value);
  } else if (!key.starts_with("path.") || key.size() == 5) {
    throw ValidationError("unknown configuration key '" + std::string(key) + "'");
  }
  entries_.insert_or_assign(std::string(key), std::move(value));
}

void RunConfig::merge(std::istream& in, std::string_view origin) {
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(number);
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(where + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ValidationError(where + ": repeated key '" + key + "'");
    }
    try {
      set(key, value);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  merge(in, path.string());
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ValidationError("configuration key '" + std::string(key) + "' is not set");
  }
  return it->second;
}

double RunConfig::get_double(std::string_view key) const {
  double v = 0.0;
  if (!parse_number(get(key), v)) {
    throw ValidationError("configuration key '" + std::string(key) + "' is not a real");
  }
  return v;
}

long long RunConfig::get_int(std::string_view key) const {
  long long v = 0;
  if (!parse_number(get(key), v)) {
    throw ValidationError("configuration key '" + std::string(key) +
                          "' is not an integer");
  }
  return v;
}

std::uint64_t RunConfig::seed() const {
  std::uint64_t v = 0;
  parse_number(get("seed"), v);
  return v;
}

std::array<double, 3> RunConfig::split_ratios() const {
  return parse_ratios(get("split_ratios"));
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace cmlab
