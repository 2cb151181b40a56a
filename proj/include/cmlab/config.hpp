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

// Flat key=value run configuration. Files are merged first and command-line
// flags are applied on top, so flags win.

#ifndef CMLAB_CONFIG_HPP_
#define CMLAB_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace cmlab {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

class RunConfig {
 public:
  // Every tunable key with its default value.
  RunConfig();

  // Lines of "key = value"; '#' starts a comment. Unknown keys (other than
  // "path.*") and repeated keys are ValidationErrors.
  void merge(std::istream& in, std::string_view origin);
  void merge_file(const std::filesystem::path& path);

  // Same key rules as merge(); the value is type-checked for known keys.
  void set(std::string_view key, std::string value);

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;
  std::uint64_t seed() const;
  std::array<double, 3> split_ratios() const;

  // Sorted "key = value" lines, the exact form merge() accepts.
  std::string serialize() const;

  const std::map<std::string, std::string, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace cmlab

#endif  // CMLAB_CONFIG_HPP_
