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

#ifndef CMLAB_CSV_HPP_
#define CMLAB_CSV_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmlab::csv {

// Splits one line on commas, honouring double-quoted fields ("" escapes a
// quote). A trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

// Quotes the field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  // Index of `name` in the header, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  // Throws ValidationError naming `origin` when the column is missing.
  std::size_t require_column(std::string_view name,
                             std::string_view origin) const;
};

// Reads a headed table. Blank lines are skipped; rows whose width differs
// from the header raise ValidationError with the line number.
Table read(std::istream& in, std::string_view origin);
Table read_file(const std::filesystem::path& path);

// Parses a real, accepting the empty string as "absent".
std::optional<double> parse_optional_double(std::string_view field,
                                            std::string_view what);
double parse_double(std::string_view field, std::string_view what);

// Fixed-point formatting used for every numeric CSV field.
std::string format_fixed(double value, int decimals);
std::string format_optional(const std::optional<double>& value, int decimals);

}  // namespace cmlab::csv

#endif  // CMLAB_CSV_HPP_
