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

#include "cmlab/agreement.hpp"

#include "cmlab/error.hpp"

namespace cmlab {

RatingMatrix::RatingMatrix(std::size_t items, std::size_t raters,
                           std::vector<double> cells)
    : items_(items), raters_(raters), cells_(std::move(cells)) {
  if (items_ < 2 || raters_ < 2) {
    throw ValidationError("rating matrix needs >= 2 items and >= 2 raters");
  }
  if (cells_.size() != items_ * raters_) {
    throw ValidationError("rating matrix is not rectangular");
  }
}

RatingMatrix RatingMatrix::from_rows(
    const std::vector<std::vector<double>>& rows) {
  const std::size_t k = rows.empty() ? 0 : rows.front().size();
  std::vector<double> cells;
  cells.reserve(rows.size() * k);
  for (const auto& row : rows) {
    if (row.size() != k) {
      throw ValidationError("rating matrix is not rectangular");
    }
    cells.insert(cells.end(), row.begin(), row.end());
  }
  return RatingMatrix(rows.size(), k, std::move(cells));
}

RatingMatrix RatingMatrix::from_triples(
    std::span<const std::array<int, 3>> triples) {
  std::vector<double> cells;
  cells.reserve(triples.size() * 3);
  for (const auto& t : triples) {
    for (int r : t) cells.push_back(r);
  }
  return RatingMatrix(triples.size(), 3, std::move(cells));
}

OneWayAnovaTerms one_way_terms(const RatingMatrix& m) {
  const std::size_t n = m.items();
  const std::size_t k = m.raters();
  double grand = 0.0;
  std::vector<double> item_mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) item_mean[i] += m.at(i, j);
    grand += item_mean[i];
    item_mean[i] /= static_cast<double>(k);
  }
  grand /= static_cast<double>(n * k);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = item_mean[i] - grand;
    ss_between += static_cast<double>(k) * d * d;
    for (std::size_t j = 0; j < k; ++j) {
      const double e = m.at(i, j) - item_mean[i];
      ss_within += e * e;
    }
  }
  OneWayAnovaTerms t;
  t.ms_between = ss_between / static_cast<double>(n - 1);
  t.ms_within = ss_within / static_cast<double>(n * (k - 1));
  return t;
}

double icc1k(const RatingMatrix& matrix) {
  const auto t = one_way_terms(matrix);
  if (t.ms_between <= 0.0) {
    throw NumericalError("ICC1k undefined: no between-item variance");
  }
  return (t.ms_between - t.ms_within) / t.ms_between;
}

std::vector<ReliabilityRow> reliability_table(
    std::span<const ReliabilityRecord> records, std::span<const int> thresholds) {
  std::vector<ReliabilityRow> rows(thresholds.size());
  const auto bins = static_cast<std::ptrdiff_t>(thresholds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < bins; ++b) {
    ReliabilityRow& row = rows[b];
    row.max_disagreement = thresholds[b];
    row.label = thresholds[b] == 0 ? "0" : "0-" + std::to_string(thresholds[b]);
    std::vector<std::array<int, 3>> subset;
    for (const auto& r : records) {
      if (r.summary.disagreement <= thresholds[b]) subset.push_back(r.ratings);
    }
    row.samples = subset.size();
    row.coverage = records.empty()
                       ? 0.0
                       : static_cast<double>(subset.size()) /
                             static_cast<double>(records.size());
    if (subset.size() >= 2) {
      const auto t = one_way_terms(RatingMatrix::from_triples(subset));
      if (t.ms_between > 0.0) {
        row.icc1k = (t.ms_between - t.ms_within) / t.ms_between;
      }
    }
  }
  return rows;
}

}  // namespace cmlab
