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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cmlab/error.hpp"
#include "cmlab/rng.hpp"

namespace cmlab {
namespace {

// Total-minus-within decomposition, computed with plain loops.
double naive_icc1k(const std::vector<std::vector<double>>& rows) {
  const double n = static_cast<double>(rows.size());
  const double k = static_cast<double>(rows[0].size());
  double grand = 0.0;
  for (const auto& r : rows) {
    for (double v : r) grand += v;
  }
  grand /= n * k;
  double sst = 0.0;
  double ssw = 0.0;
  for (const auto& r : rows) {
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= k;
    for (double v : r) {
      sst += (v - grand) * (v - grand);
      ssw += (v - mean) * (v - mean);
    }
  }
  const double msb = (sst - ssw) / (n - 1);
  const double msw = ssw / (n * (k - 1));
  return (msb - msw) / msb;
}

std::vector<std::vector<double>> random_rows(Rng& rng, std::size_t n,
                                             std::size_t k) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(k));
  for (auto& r : rows) {
    for (double& v : r) v = 1.0 + 4.0 * unit_uniform(rng);
  }
  return rows;
}

TEST(Icc1k, ZeroDisagreementGivesOne) {
  EXPECT_EQ(icc1k(RatingMatrix::from_rows({{1, 1, 1}, {5, 5, 5}})), 1.0);
}

TEST(Icc1k, SumsOfSquaresExample) {
  const auto m = RatingMatrix::from_rows({{1, 2, 3}, {4, 5, 3}, {2, 2, 2}});
  const auto terms = one_way_terms(m);
  EXPECT_NEAR(terms.ms_between, 4.0, 1e-12);
  EXPECT_NEAR(terms.ms_within, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(icc1k(m), (4.0 - 2.0 / 3.0) / 4.0, 1e-12);
}

TEST(Icc1k, DegenerateInputs) {
  EXPECT_THROW(icc1k(RatingMatrix::from_rows({{3, 3, 3}, {3, 3, 3}})),
               NumericalError);
  EXPECT_THROW(RatingMatrix::from_rows({{1, 2, 3}}), ValidationError);
  EXPECT_THROW(RatingMatrix::from_rows({{1, 2}, {1}}), ValidationError);
  EXPECT_THROW(RatingMatrix(2, 2, {1, 2, 3}), ValidationError);
  // Items identical in mean but noisy within: negative and not clamped.
  EXPECT_LT(icc1k(RatingMatrix::from_rows({{1, 5, 3}, {5, 1, 4}, {3, 4, 2}})), 0.0);
}

TEST(Icc1k, MatchesNaiveOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 5);
    const std::size_t k = 2 + uniform_index(rng, 5);
    const auto rows = random_rows(rng, n, k);
    // Relative: items with nearly equal means push ICC far below zero.
    const double want = naive_icc1k(rows);
    EXPECT_NEAR(icc1k(RatingMatrix::from_rows(rows)), want,
                1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(Icc1k, InvariantUnderAffineRescaling) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto rows = random_rows(rng, 5, 3);
    const double base = icc1k(RatingMatrix::from_rows(rows));
    const double a = 0.1 + 10.0 * unit_uniform(rng);
    const double b = -5.0 + 10.0 * unit_uniform(rng);
    for (auto& r : rows) {
      for (double& v : r) v = a * v + b;
    }
    EXPECT_NEAR(icc1k(RatingMatrix::from_rows(rows)), base, 1e-10);
  }
}

TEST(Icc1k, InvariantUnderWithinItemPermutation) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    auto rows = random_rows(rng, 6, 4);
    const double base = icc1k(RatingMatrix::from_rows(rows));
    for (auto& r : rows) shuffle(std::span<double>(r), rng);
    EXPECT_NEAR(icc1k(RatingMatrix::from_rows(rows)), base, 1e-10);
  }
}

std::vector<ReliabilityRecord> random_records(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ReliabilityRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ReliabilityRecord r;
    const int base = 1 + static_cast<int>(uniform_index(rng, 5));
    for (int& v : r.ratings) {
      v = std::clamp(base + static_cast<int>(uniform_index(rng, 3)) - 1, 1, 5);
    }
    r.summary = summarize(r.ratings);
    out.push_back(r);
  }
  return out;
}

TEST(ReliabilityTable, AllAgreeingRecords) {
  std::vector<ReliabilityRecord> records;
  for (int v : {1, 2, 4, 5}) {
    ReliabilityRecord r;
    r.ratings = {v, v, v};
    r.summary = summarize(r.ratings);
    records.push_back(r);
  }
  const auto rows = reliability_table(records);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].label, "0");
  EXPECT_EQ(rows[0].icc1k, 1.0);
  EXPECT_EQ(rows[0].coverage, 1.0);
  EXPECT_EQ(rows[4].label, "0-8");
}

TEST(ReliabilityTable, MatchesSubsetRecomputation) {
  const auto records = random_records(50, 10);
  const auto rows = reliability_table(records);
  double last_coverage = 0.0;
  for (const auto& row : rows) {
    std::vector<std::vector<double>> subset;
    for (const auto& r : records) {
      if (r.summary.disagreement <= row.max_disagreement) {
        subset.push_back({double(r.ratings[0]), double(r.ratings[1]),
                          double(r.ratings[2])});
      }
    }
    EXPECT_EQ(row.samples, subset.size());
    EXPECT_DOUBLE_EQ(row.coverage, subset.size() / 50.0);
    EXPECT_GE(row.coverage, last_coverage);
    last_coverage = row.coverage;
    if (subset.size() >= 2) {
      ASSERT_TRUE(row.icc1k.has_value());
      EXPECT_NEAR(*row.icc1k, naive_icc1k(subset), 1e-10);
    } else {
      EXPECT_FALSE(row.icc1k.has_value());
    }
  }
  EXPECT_EQ(rows.back().coverage, 1.0);
}

TEST(ReliabilityTable, SparseBinsAreAbsent) {
  std::vector<ReliabilityRecord> records(1);
  records[0].ratings = {1, 3, 5};
  records[0].summary = summarize(records[0].ratings);
  const std::array<int, 2> thresholds = {0, 8};
  const auto rows = reliability_table(records, thresholds);
  EXPECT_EQ(rows[0].samples, 0u);
  EXPECT_FALSE(rows[0].icc1k.has_value());
  EXPECT_FALSE(rows[1].icc1k.has_value());  // a single record
  EXPECT_TRUE(reliability_table({}, thresholds)[0].coverage == 0.0);
}

}  // namespace
}  // namespace cmlab
