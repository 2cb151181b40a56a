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

#include "cmlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "cmlab/error.hpp"

namespace cmlab::stats {
namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("series length mismatch (" +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ValidationError("need at least 2 observations");
}

double ibeta(double a, double b, double x) {
  try {
    return boost::math::ibeta(a, b, x);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("incomplete beta failed: ") + e.what());
  }
}

double ibetac(double a, double b, double x) {
  try {
    return boost::math::ibetac(a, b, x);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("incomplete beta failed: ") + e.what());
  }
}

void check_df(double df, const char* what) {
  if (!(df > 0.0) || !std::isfinite(df)) {
    throw ValidationError(std::string(what) + " must be positive");
  }
}

// Upper tail of the F distribution without 1 - cdf cancellation.
double f_survival(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return ibetac(df1 / 2.0, df2 / 2.0, df1 * f / (df1 * f + df2));
}

Coefficient make_coefficient(std::string name, double estimate,
                             double std_error, double df) {
  Coefficient c;
  c.name = std::move(name);
  c.estimate = estimate;
  c.std_error = std_error;
  if (std_error > 0.0) {
    c.t_stat = estimate / std_error;
  } else {
    c.t_stat = estimate == 0.0
                   ? 0.0
                   : std::copysign(std::numeric_limits<double>::infinity(),
                                   estimate);
  }
  c.p_value = t_two_sided_p(c.t_stat, df);
  c.stars = stars_for(c.p_value);
  return c;
}

std::size_t bin_of(double v, std::span<const double> edges) {
  const std::size_t bins = edges.size() - 1;
  for (std::size_t k = 0; k + 1 < bins; ++k) {
    if (v < edges[k + 1]) return k;
  }
  return bins - 1;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw NumericalError("correlation undefined: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double mean_rank = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrelationMatrix correlation_matrix(std::span<const Series> features,
                                     std::span<const Series> targets) {
  CorrelationMatrix m;
  for (const auto& f : features) m.features.push_back(f.name);
  for (const auto& t : targets) m.targets.push_back(t.name);
  m.cells.assign(features.size(), std::vector<CorrelationCell>(targets.size()));
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      const auto& fv = features[fi].values;
      const auto& tv = targets[ti].values;
      if (fv.size() != tv.size()) {
        throw ValidationError("feature '" + features[fi].name +
                              "' and target '" + targets[ti].name +
                              "' are not aligned");
      }
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t i = 0; i < fv.size(); ++i) {
        if (fv[i] && tv[i]) {
          x.push_back(*fv[i]);
          y.push_back(*tv[i]);
        }
      }
      CorrelationCell& cell = m.cells[fi][ti];
      cell.pairs = x.size();
      if (x.size() < 2) continue;
      try {
        cell.pearson = pearson(x, y);
        cell.spearman = spearman(x, y);
      } catch (const NumericalError&) {
        cell.pearson.reset();
        cell.spearman.reset();
      }
    }
  }
  return m;
}

std::vector<Series> metric_feature_series(std::span<const MetricRow> rows) {
  std::vector<Series> out = {{"length", {}},
                             {"cmi", {}},
                             {"switch_points", {}},
                             {"burstiness", {}},
                             {"symcom_sentence", {}}};
  const bool external = std::any_of(rows.begin(), rows.end(), [](const MetricRow& r) {
    return r.external_score.has_value();
  });
  if (external) out.push_back({"external_score", {}});
  for (auto& s : out) s.values.reserve(rows.size());
  for (const MetricRow& r : rows) {
    out[0].values.emplace_back(r.length);
    out[1].values.emplace_back(r.cmi);
    out[2].values.emplace_back(r.switch_points);
    out[3].values.push_back(r.burstiness);
    out[4].values.push_back(r.symcom_sentence);
    if (external) out[5].values.push_back(r.external_score);
  }
  return out;
}

MinMax fit_minmax(std::span<const double> column) {
  if (column.empty()) throw ValidationError("cannot normalise an empty column");
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  if (!(*hi > *lo)) {
    throw ValidationError("cannot normalise a constant column");
  }
  return {*lo, *hi};
}

std::vector<double> minmax_normalize(std::span<const double> column) {
  const MinMax mm = fit_minmax(column);
  std::vector<double> out;
  out.reserve(column.size());
  for (double v : column) out.push_back(mm.apply(v));
  return out;
}

double t_cdf(double t, double df) {
  check_df(df, "t degrees of freedom");
  if (std::isnan(t)) throw ValidationError("t statistic is NaN");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * ibeta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

double t_two_sided_p(double t, double df) {
  check_df(df, "t degrees of freedom");
  if (std::isnan(t)) throw ValidationError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return std::clamp(ibeta(df / 2.0, 0.5, df / (df + t * t)), 0.0, 1.0);
}

double f_cdf(double f, double df1, double df2) {
  check_df(df1, "F numerator degrees of freedom");
  check_df(df2, "F denominator degrees of freedom");
  if (std::isnan(f)) throw ValidationError("F statistic is NaN");
  if (f <= 0.0) return 0.0;
  if (std::isinf(f)) return 1.0;
  return ibeta(df1 / 2.0, df2 / 2.0, df1 * f / (df1 * f + df2));
}

Stars stars_for(double p) {
  if (p < 0.005) return Stars::kThree;
  if (p < 0.05) return Stars::kTwo;
  if (p < 0.1) return Stars::kOne;
  return Stars::kNone;
}

std::string_view to_string(Stars s) {
  switch (s) {
    case Stars::kNone: return "";
    case Stars::kOne: return "*";
    case Stars::kTwo: return "**";
    case Stars::kThree: return "***";
  }
  return "";
}

double RegressionReport::predict(std::span<const double> x) const {
  if (x.size() != slopes.size()) {
    throw ValidationError("prediction input has " + std::to_string(x.size()) +
                          " features, model has " +
                          std::to_string(slopes.size()));
  }
  double y = intercept.estimate;
  for (std::size_t j = 0; j < x.size(); ++j) y += slopes[j].estimate * x[j];
  return y;
}

RegressionReport ols_fit(std::span<const std::string> names,
                         const std::vector<std::vector<double>>& columns,
                         std::span<const double> y) {
  const std::size_t p = columns.size();
  const std::size_t n = y.size();
  if (names.size() != p) {
    throw ValidationError("need one name per regression column");
  }
  for (const auto& c : columns) {
    if (c.size() != n) throw ValidationError("regression columns not aligned");
  }
  if (n <= p + 1) {
    throw ValidationError("OLS needs n > p + 1 (n=" + std::to_string(n) +
                          ", p=" + std::to_string(p) + ")");
  }

  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd Y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) X(i, j + 1) = columns[j][i];
    Y(i) = y[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(X);
  const auto rank = static_cast<std::size_t>(pivoted.rank());
  if (rank < p + 1) {
    std::string dropped;
    const auto& perm = pivoted.colsPermutation().indices();
    for (std::size_t k = rank; k < p + 1; ++k) {
      const int col = perm(static_cast<Eigen::Index>(k));
      if (!dropped.empty()) dropped += ", ";
      dropped += col == 0 ? std::string("intercept") : names[col - 1];
    }
    throw NumericalError("design matrix is rank deficient; collinear: " +
                         dropped);
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd beta = qr.solve(Y);
  const Eigen::VectorXd resid = Y - X * beta;

  const Eigen::MatrixXd R =
      qr.matrixQR().topRows(p + 1).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd R_inv =
      R.triangularView<Eigen::Upper>().solve(
          Eigen::MatrixXd::Identity(p + 1, p + 1));
  const Eigen::VectorXd gram_inv_diag = (R_inv * R_inv.transpose()).diagonal();

  const double df = static_cast<double>(n - p - 1);
  const double sse = resid.squaredNorm();
  const double sigma2 = sse / df;
  const double mean_y = Y.mean();
  const double sst = (Y.array() - mean_y).square().sum();

  RegressionReport report;
  report.n = n;
  report.r_squared = sst > 0.0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : 0.0;
  report.residuals.assign(resid.data(), resid.data() + n);
  report.intercept = make_coefficient(
      "intercept", beta(0), std::sqrt(sigma2 * gram_inv_diag(0)), df);
  for (std::size_t j = 0; j < p; ++j) {
    report.slopes.push_back(make_coefficient(
        names[j], beta(j + 1), std::sqrt(sigma2 * gram_inv_diag(j + 1)), df));
  }
  return report;
}

RegressionReport normalized_ols_fit(
    std::span<const std::string> names,
    const std::vector<std::vector<double>>& columns, std::span<const double> y) {
  std::vector<std::vector<double>> scaled;
  scaled.reserve(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    try {
      scaled.push_back(minmax_normalize(columns[j]));
    } catch (const ValidationError& e) {
      throw ValidationError("column '" + names[j] + "': " + e.what());
    }
  }
  return ols_fit(names, scaled, y);
}

std::string_view to_string(SymcomCategory c) {
  switch (c) {
    case SymcomCategory::kMonolingual: return "Monolingual";
    case SymcomCategory::kMixed: return "Mixed";
    case SymcomCategory::kAbsent: return "Absent";
  }
  return "Absent";
}

SymcomCategory symcom_category(const std::optional<double>& symcom) {
  if (!symcom) return SymcomCategory::kAbsent;
  return std::abs(*symcom) == 1.0 ? SymcomCategory::kMonolingual
                                  : SymcomCategory::kMixed;
}

SymcomCategory symcom_category(const TaggedSentence& sentence, PosTag pos) {
  return symcom_category(symcom_pos(sentence, pos));
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) {
    throw ValidationError("ANOVA needs at least 2 groups");
  }
  std::size_t n = 0;
  double total = 0.0;
  AnovaResult result;
  for (const auto& g : groups) {
    if (g.empty()) throw ValidationError("ANOVA group is empty");
    n += g.size();
    total += std::accumulate(g.begin(), g.end(), 0.0);
    result.group_sizes.push_back(g.size());
  }
  const std::size_t k = groups.size();
  if (n <= k) {
    throw ValidationError("ANOVA needs more observations than groups");
  }
  const double grand = total / static_cast<double>(n);
  double ssb = 0.0;
  double ssw = 0.0;
  for (const auto& g : groups) {
    const double mean =
        std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double v : g) ssw += (v - mean) * (v - mean);
  }
  result.df_between = static_cast<int>(k - 1);
  result.df_within = static_cast<int>(n - k);
  const double msb = ssb / result.df_between;
  const double msw = ssw / result.df_within;
  if (msw <= 0.0) {
    throw NumericalError("ANOVA undefined: no within-group variance");
  }
  result.f_stat = msb / msw;
  result.p_value = f_survival(result.f_stat, result.df_between, result.df_within);
  return result;
}

Histogram histogram(std::span<const double> values, double width) {
  if (values.empty()) throw ValidationError("histogram of an empty series");
  if (!(width > 0.0)) throw ValidationError("histogram bin width must be > 0");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  Histogram h;
  h.width = width;
  h.origin = std::floor(*lo / width) * width;
  const auto bins =
      static_cast<std::size_t>(std::floor((*hi - h.origin) / width)) + 1;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::floor((v - h.origin) / width));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

Histogram histogram(std::span<const double> values, double width, double lo,
                    double hi) {
  if (!(width > 0.0)) throw ValidationError("histogram bin width must be > 0");
  if (!(hi > lo)) throw ValidationError("histogram range is empty");
  Histogram h;
  h.width = width;
  h.origin = lo;
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / width - 1e-9));
  h.counts.assign(bins, 0);
  for (double v : values) {
    const double pos = std::floor((v - lo) / width);
    std::size_t b = 0;
    if (pos > 0) b = std::min(static_cast<std::size_t>(pos), bins - 1);
    ++h.counts[b];
  }
  return h;
}

ErrorReport error_analysis(std::span<const double> predictions,
                           std::span<const double> truths,
                           std::span<const MetricRow> rows,
                           const ErrorAnalysisOptions& options) {
  if (predictions.size() != truths.size() || truths.size() != rows.size()) {
    throw ValidationError("error analysis inputs are not aligned");
  }
  if (truths.empty()) throw ValidationError("error analysis of no samples");
  if (options.rating_edges.size() < 2) {
    throw ValidationError("need at least 2 rating bin edges");
  }

  ErrorReport report;
  report.errors.reserve(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) {
    report.errors.push_back(truths[i] - predictions[i]);
  }
  report.histogram = histogram(report.errors, options.bin_width,
                               options.range_lo, options.range_hi);

  const auto& edges = options.rating_edges;
  report.by_rating.resize(edges.size() - 1);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    report.by_rating[b].lo = edges[b];
    report.by_rating[b].hi = edges[b + 1];
  }
  for (std::size_t i = 0; i < truths.size(); ++i) {
    auto& bin = report.by_rating[bin_of(truths[i], edges)];
    ++bin.count;
    bin.mean_error += report.errors[i];
    bin.mean_abs_error += std::abs(report.errors[i]);
  }
  for (auto& bin : report.by_rating) {
    if (bin.count) {
      bin.mean_error /= static_cast<double>(bin.count);
      bin.mean_abs_error /= static_cast<double>(bin.count);
    }
  }

  const auto features = metric_feature_series(rows);
  Series error_series{"error", {}};
  for (double e : report.errors) error_series.values.emplace_back(e);
  report.correlations = correlation_matrix(features, std::span(&error_series, 1));

  for (std::size_t p = 0; p < kPosTagCount; ++p) {
    PosAnova entry;
    entry.pos = kAllPosTags[p];
    std::array<std::vector<double>, 3> by_category;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto c = symcom_category(rows[i].symcom_by_pos[p]);
      by_category[static_cast<std::size_t>(c)].push_back(report.errors[i]);
    }
    std::vector<std::vector<double>> groups;
    for (std::size_t c = 0; c < 3; ++c) {
      entry.category_sizes[c] = by_category[c].size();
      if (!by_category[c].empty()) groups.push_back(by_category[c]);
    }
    if (groups.size() >= 2) {
      try {
        entry.result = anova_oneway(groups);
      } catch (const std::exception&) {
        entry.result.reset();
      }
    }
    report.anova.push_back(std::move(entry));
  }
  return report;
}

}  // namespace cmlab::stats
