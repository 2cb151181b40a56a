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

#include "cmlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cmlab/csv.hpp"
#include "cmlab/error.hpp"

namespace cmlab::report {
namespace {

std::string row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string rule(std::size_t columns) {
  std::string out = "|";
  for (std::size_t i = 0; i < columns; ++i) out += i == 0 ? " --- |" : " ---: |";
  return out + "\n";
}

std::string fixed(double v, int decimals) { return csv::format_fixed(v, decimals); }

std::string percent(double fraction) {
  return fixed(100.0 * fraction, 0) + "%";
}

std::string starred(const stats::Coefficient& c) {
  return fixed(c.estimate, 2) + std::string(stats::to_string(c.stars));
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string trim_number(double v) {
  std::string s = fixed(v, 4);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::string stamp(const RunConfig& config) {
  std::string out = "Generated by cmlab " + std::string(kToolkitVersion) + "\n\n";
  out += "```\n" + config.serialize() + "```\n";
  return out;
}

std::string reliability_table(
    std::span<const Named<std::vector<ReliabilityRow>>> subsets) {
  std::vector<std::string> header = {"Disagreement"};
  for (const auto& [name, rows] : subsets) {
    header.push_back(name + " ICC1k");
    header.push_back(name + " % of samples covered");
  }
  std::string out = row(header) + rule(header.size());
  std::size_t n = 0;
  for (const auto& s : subsets) n = std::max(n, s.second.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> cells;
    for (const auto& [name, rows] : subsets) {
      if (cells.empty()) cells.push_back(i < rows.size() ? rows[i].label : "");
      if (i < rows.size()) {
        cells.push_back(rows[i].icc1k ? fixed(*rows[i].icc1k, 2) : "-");
        cells.push_back(percent(rows[i].coverage));
      } else {
        cells.insert(cells.end(), {"", ""});
      }
    }
    out += row(cells);
  }
  return out;
}

std::string regression_table(
    std::span<const Named<stats::RegressionReport>> subsets) {
  std::vector<std::string> header = {"Independent Variable"};
  for (const auto& s : subsets) header.push_back(s.first);
  std::string out = row(header) + rule(header.size());
  if (subsets.empty()) return out;

  std::vector<std::string> names;
  for (const auto& s : subsets) {
    for (const auto& c : s.second.slopes) {
      if (std::find(names.begin(), names.end(), c.name) == names.end()) {
        names.push_back(c.name);
      }
    }
  }
  for (const auto& name : names) {
    std::vector<std::string> cells = {name};
    for (const auto& s : subsets) {
      const auto it = std::find_if(s.second.slopes.begin(), s.second.slopes.end(),
                                   [&](const auto& c) { return c.name == name; });
      cells.push_back(it == s.second.slopes.end() ? "-" : starred(*it));
    }
    out += row(cells);
  }
  std::vector<std::string> intercept = {"Intercept"};
  std::vector<std::string> r2 = {"R^2"};
  std::vector<std::string> n = {"n"};
  for (const auto& s : subsets) {
    intercept.push_back(starred(s.second.intercept));
    r2.push_back(fixed(s.second.r_squared, 3));
    n.push_back(std::to_string(s.second.n));
  }
  return out + row(intercept) + row(r2) + row(n);
}

std::string correlation_table(const stats::CorrelationMatrix& matrix) {
  std::vector<std::string> header = {"Metric"};
  for (const auto& t : matrix.targets) {
    header.push_back(t + " (Pearson)");
    header.push_back(t + " (Spearman)");
  }
  std::string out = row(header) + rule(header.size());
  for (std::size_t f = 0; f < matrix.features.size(); ++f) {
    std::vector<std::string> cells = {matrix.features[f]};
    for (const auto& cell : matrix.cells[f]) {
      cells.push_back(cell.pearson ? fixed(*cell.pearson, 3) : "-");
      cells.push_back(cell.spearman ? fixed(*cell.spearman, 3) : "-");
    }
    out += row(cells);
  }
  return out;
}

void write_correlation_csv(std::ostream& out,
                           const stats::CorrelationMatrix& matrix) {
  out << "feature,target,pearson,spearman,pairs\n";
  for (std::size_t f = 0; f < matrix.features.size(); ++f) {
    for (std::size_t t = 0; t < matrix.targets.size(); ++t) {
      const auto& cell = matrix.cells[f][t];
      out << csv::join({matrix.features[f], matrix.targets[t],
                        csv::format_optional(cell.pearson, 6),
                        csv::format_optional(cell.spearman, 6),
                        std::to_string(cell.pairs)})
          << '\n';
    }
  }
}

std::string anova_table(
    std::span<const Named<std::vector<stats::PosAnova>>> subsets) {
  std::vector<std::string> header = {"PoS"};
  for (const auto& s : subsets) {
    header.push_back(s.first + " F-statistic");
    header.push_back(s.first + " p-value");
  }
  std::string out = row(header) + rule(header.size());
  for (std::size_t p = 0; p < kPosTagCount; ++p) {
    std::vector<std::string> cells = {std::string(to_string(kAllPosTags[p]))};
    for (const auto& [name, entries] : subsets) {
      const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) {
        return e.pos == kAllPosTags[p];
      });
      if (it == entries.end() || !it->result) {
        cells.insert(cells.end(), {"-", "-"});
        continue;
      }
      cells.push_back(fixed(it->result->f_stat, 3) +
                      std::string(stats::to_string(stats::stars_for(it->result->p_value))));
      cells.push_back(fixed(it->result->p_value, 3));
    }
    out += row(cells);
  }
  return out;
}

std::string eval_table(std::span<const Named<EvalResult>> rows) {
  std::string out = row({"Model", "RMSE", "MAE", "n"}) + rule(4);
  for (const auto& [name, e] : rows) {
    out += row({name, fixed(e.rmse, 3), fixed(e.mae, 3), std::to_string(e.n)});
  }
  return out;
}

std::string histogram_svg(const stats::Histogram& h, std::string_view title,
                          std::string_view x_label) {
  if (h.counts.empty()) throw ValidationError("histogram has no bins");
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 400.0;
  constexpr double kLeft = 60.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 60.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::size_t peak = *std::max_element(h.counts.begin(), h.counts.end());
  const double bar_w = plot_w / static_cast<double>(h.counts.size());
  const double scale = peak == 0 ? 0.0 : plot_h / static_cast<double>(peak);
  const std::size_t label_every =
      std::max<std::size_t>(1, (h.counts.size() + 11) / 12);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(title)
      << "</text>\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double bh = scale * static_cast<double>(h.counts[b]);
    const double x = kLeft + bar_w * static_cast<double>(b);
    svg << "<rect class=\"bar\" data-count=\"" << h.counts[b] << "\" x=\""
        << trim_number(x) << "\" y=\"" << trim_number(kTop + plot_h - bh)
        << "\" width=\"" << trim_number(bar_w) << "\" height=\"" << trim_number(bh)
        << "\" fill=\"#4c72b0\" stroke=\"white\"/>\n";
  }
  for (std::size_t b = 0; b <= h.counts.size(); b += label_every) {
    const double x = kLeft + bar_w * static_cast<double>(b);
    svg << "<text x=\"" << trim_number(x) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << trim_number(h.lower(b)) << "</text>\n";
  }
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << peak << "</text>\n";
  svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + plot_h
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
  svg << "<text class=\"x-label\" x=\"" << kLeft + plot_w / 2 << "\" y=\""
      << kHeight - 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">" << xml_escape(x_label) << "</text>\n";
  svg << "<text class=\"y-label\" x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 16 " << kTop + plot_h / 2 << ")\">count</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void render_histogram(std::span<const double> series, double width,
                      const std::filesystem::path& path, std::string_view title,
                      std::string_view x_label) {
  if (series.empty()) throw ValidationError("cannot plot an empty series");
  const auto h = stats::histogram(series, width);
  const std::string svg = histogram_svg(h, title, x_label);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace cmlab::report
