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

// Inter-annotator reliability with the one-way random-effects, average-measure
// intraclass correlation ICC(1,k).

#ifndef CMLAB_AGREEMENT_HPP_
#define CMLAB_AGREEMENT_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmlab/corpus.hpp"

namespace cmlab {

// n items x k ratings, row-major, no missing cells.
class RatingMatrix {
 public:
  RatingMatrix(std::size_t items, std::size_t raters, std::vector<double> cells);
  static RatingMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static RatingMatrix from_triples(std::span<const std::array<int, 3>> triples);

  std::size_t items() const { return items_; }
  std::size_t raters() const { return raters_; }
  double at(std::size_t item, std::size_t rater) const {
    return cells_[item * raters_ + rater];
  }

 private:
  std::size_t items_;
  std::size_t raters_;
  std::vector<double> cells_;
};

struct OneWayAnovaTerms {
  double ms_between = 0.0;  // df = n - 1
  double ms_within = 0.0;   // df = n (k - 1)
};

OneWayAnovaTerms one_way_terms(const RatingMatrix& matrix);

// (MSB - MSW) / MSB. Can be negative; not clamped. Throws NumericalError
// when MSB is zero.
double icc1k(const RatingMatrix& matrix);

struct ReliabilityRow {
  std::string label;  // "0", "0-2", ...
  int max_disagreement = 0;
  std::optional<double> icc1k;  // absent when < 2 samples or MSB == 0
  double coverage = 0.0;
  std::size_t samples = 0;
};

struct ReliabilityRecord {
  RatingSummary summary;
  std::array<int, 3> ratings{};
};

inline constexpr std::array<int, 5> kDefaultReliabilityThresholds = {0, 2, 4,
                                                                     6, 8};

// One row per nested bin "disagreement <= t"; defaults to t = 0,2,4,6,8.
// Bins are computed in parallel.
std::vector<ReliabilityRow> reliability_table(
    std::span<const ReliabilityRecord> records,
    std::span<const int> thresholds = kDefaultReliabilityThresholds);

}  // namespace cmlab

#endif  // CMLAB_AGREEMENT_HPP_
