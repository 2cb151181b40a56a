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

// Report rendering: markdown tables, correlation CSV and SVG histograms.
// Table renderers take one column group per data subset so subsets line up
// side by side.

#ifndef CMLAB_REPORT_HPP_
#define CMLAB_REPORT_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmlab/agreement.hpp"
#include "cmlab/config.hpp"
#include "cmlab/predictor.hpp"
#include "cmlab/stats.hpp"

namespace cmlab::report {

template <typename T>
using Named = std::pair<std::string, T>;

// Toolkit version plus the full configuration in a fenced block.
std::string stamp(const RunConfig& config);

// Disagreement | <subset> ICC1k | <subset> % of samples covered | ...
std::string reliability_table(
    std::span<const Named<std::vector<ReliabilityRow>>> subsets);

// One row per independent variable, then Intercept, R^2 and n. Cells are
// estimates with significance stars.
std::string regression_table(std::span<const Named<stats::RegressionReport>> subsets);

// Features down, Pearson and Spearman per target across.
std::string correlation_table(const stats::CorrelationMatrix& matrix);

// feature,target,pearson,spearman,pairs
void write_correlation_csv(std::ostream& out,
                           const stats::CorrelationMatrix& matrix);

// PoS | <subset> F-statistic | <subset> p-value | ...; F carries stars.
std::string anova_table(std::span<const Named<std::vector<stats::PosAnova>>> subsets);

std::string eval_table(std::span<const Named<EvalResult>> rows);

// Standalone SVG: one rect per bin (class "bar", data-count attribute),
// bin-edge tick labels and axis titles.
std::string histogram_svg(const stats::Histogram& histogram,
                          std::string_view title, std::string_view x_label);

// Auto-ranged histogram of `series` written to `path`. Empty series raise
// ValidationError.
void render_histogram(std::span<const double> series, double width,
                      const std::filesystem::path& path,
                      std::string_view title = "",
                      std::string_view x_label = "value");

}  // namespace cmlab::report

#endif  // CMLAB_REPORT_HPP_
