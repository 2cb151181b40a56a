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

// Statistical analysis of metrics against human ratings: correlations,
// min-max normalised OLS with significance stars, one-way ANOVA and
// prediction-error analysis.

#ifndef CMLAB_STATS_HPP_
#define CMLAB_STATS_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmlab/corpus.hpp"
#include "cmlab/metrics.hpp"

namespace cmlab::stats {

// Sample Pearson correlation. Throws ValidationError on length mismatch or
// fewer than 2 points, NumericalError on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

double spearman(std::span<const double> x, std::span<const double> y);

// A named series that may have gaps.
struct Series {
  std::string name;
  std::vector<std::optional<double>> values;
};

struct CorrelationCell {
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::size_t pairs = 0;  // pairwise-complete samples used
};

struct CorrelationMatrix {
  std::vector<std::string> features;
  std::vector<std::string> targets;
  std::vector<std::vector<CorrelationCell>> cells;  // [feature][target]
};

// Every (feature, target) pair over pairwise-complete samples. Cells with
// fewer than 2 pairs or zero variance are left empty.
CorrelationMatrix correlation_matrix(std::span<const Series> features,
                                     std::span<const Series> targets);

// length, cmi, switch_points, burstiness, symcom_sentence and, when any row
// has one, external_score.
std::vector<Series> metric_feature_series(std::span<const MetricRow> rows);

struct MinMax {
  double min = 0.0;
  double max = 1.0;
  double apply(double x) const { return (x - min) / (max - min); }
};

// Throws ValidationError for an empty or constant column.
MinMax fit_minmax(std::span<const double> column);
std::vector<double> minmax_normalize(std::span<const double> column);

// Regularised-incomplete-beta based CDFs. Non-convergence raises
// NumericalError.
double t_cdf(double t, double df);
double f_cdf(double f, double df1, double df2);
// Two-sided p-value for a t statistic.
double t_two_sided_p(double t, double df);

enum class Stars { kNone, kOne, kTwo, kThree };
// *** p < 0.005, ** p < 0.05, * p < 0.1.
Stars stars_for(double p_value);
std::string_view to_string(Stars s);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  Stars stars = Stars::kNone;
};

struct RegressionReport {
  Coefficient intercept;
  std::vector<Coefficient> slopes;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::vector<double> residuals;

  double predict(std::span<const double> x) const;
};

// Intercept-augmented least squares via Householder QR. `columns` holds p
// feature columns of equal length n; requires n > p + 1 and full column
// rank (rank deficiency raises NumericalError naming the dropped columns).
RegressionReport ols_fit(std::span<const std::string> names,
                         const std::vector<std::vector<double>>& columns,
                         std::span<const double> y);

// Normalises every column with min-max first, the dependent variable is
// left on its own scale.
RegressionReport normalized_ols_fit(std::span<const std::string> names,
                                    const std::vector<std::vector<double>>& columns,
                                    std::span<const double> y);

enum class SymcomCategory { kMonolingual, kMixed, kAbsent };
std::string_view to_string(SymcomCategory c);

SymcomCategory symcom_category(const std::optional<double>& symcom);
SymcomCategory symcom_category(const TaggedSentence& sentence, PosTag pos);

struct AnovaResult {
  double f_stat = 0.0;
  double p_value = 1.0;
  int df_between = 0;
  int df_within = 0;
  std::vector<std::size_t> group_sizes;
};

// Throws ValidationError for fewer than 2 groups, an empty group, or
// n <= groups; NumericalError when the within-group mean square is zero.
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

struct Histogram {
  double origin = 0.0;
  double width = 1.0;
  std::vector<std::size_t> counts;

  double lower(std::size_t bin) const { return origin + width * bin; }
};

// Bins start at floor(min / width) * width and cover the data.
Histogram histogram(std::span<const double> values, double width);
// Fixed range [lo, hi); values outside are clamped into the end bins.
Histogram histogram(std::span<const double> values, double width, double lo,
                    double hi);

struct ErrorAnalysisOptions {
  double bin_width = 0.25;
  double range_lo = -4.0;
  double range_hi = 4.0;
  std::vector<double> rating_edges = {1.0, 2.0, 3.0, 4.0, 5.0};
};

struct RatingBinErrors {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_error = 0.0;
  double mean_abs_error = 0.0;
};

struct PosAnova {
  PosTag pos = PosTag::X;
  std::array<std::size_t, 3> category_sizes{};  // Monolingual, Mixed, Absent
  std::optional<AnovaResult> result;            // absent if < 2 groups
};

struct ErrorReport {
  std::vector<double> errors;  // truth - prediction
  Histogram histogram;
  std::vector<RatingBinErrors> by_rating;
  CorrelationMatrix correlations;  // metric features vs error
  std::vector<PosAnova> anova;     // one entry per PoS tag
};

// Predictions, truths and rows must be aligned by index.
ErrorReport error_analysis(std::span<const double> predictions,
                           std::span<const double> truths,
                           std::span<const MetricRow> rows,
                           const ErrorAnalysisOptions& options = {});

}  // namespace cmlab::stats

#endif  // CMLAB_STATS_HPP_
