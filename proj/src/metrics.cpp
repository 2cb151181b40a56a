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

#include "cmlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "cmlab/csv.hpp"
#include "cmlab/error.hpp"

namespace cmlab {
namespace {

constexpr int kCmiDecimals = 2;
constexpr int kRealDecimals = 6;

bool is_language(LanguageTag t) { return t != LanguageTag::kNeutral; }

void check_external_ids(std::span<const TaggedSentence> corpus,
                        const ExternalScores* scores) {
  if (!scores) return;
  std::unordered_set<std::string_view> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus) ids.insert(s.id);
  for (const auto& [id, value] : *scores) {
    if (!ids.contains(id)) {
      throw ValidationError("external score for unknown id '" + id + "'");
    }
  }
}

void attach_external(MetricRow& row, const ExternalScores* scores) {
  if (!scores) return;
  if (auto it = scores->find(row.sample_id); it != scores->end()) {
    row.external_score = it->second;
  }
}

}  // namespace

std::vector<LanguageTag> lid_sequence(const TaggedSentence& sentence) {
  std::vector<LanguageTag> lids;
  lids.reserve(sentence.tokens.size());
  for (const Token& t : sentence.tokens) lids.push_back(t.lid);
  return lids;
}

double cmi(std::span<const LanguageTag> lids) {
  int a = 0;
  int b = 0;
  for (LanguageTag t : lids) {
    if (t == LanguageTag::kLangA) ++a;
    if (t == LanguageTag::kLangB) ++b;
  }
  const int language_tokens = a + b;  // n - u
  if (language_tokens == 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(std::max(a, b)) / language_tokens);
}

double cmi(const TaggedSentence& sentence) {
  return cmi(lid_sequence(sentence));
}

int switch_points(std::span<const LanguageTag> lids) {
  int switches = 0;
  const LanguageTag* prev = nullptr;
  for (const LanguageTag& t : lids) {
    if (!is_language(t)) continue;
    if (prev && *prev != t) ++switches;
    prev = &t;
  }
  return switches;
}

int switch_points(const TaggedSentence& sentence) {
  return switch_points(lid_sequence(sentence));
}

std::vector<int> language_spans(std::span<const LanguageTag> lids) {
  std::vector<int> spans;
  LanguageTag current = LanguageTag::kNeutral;
  for (LanguageTag t : lids) {
    if (!is_language(t)) continue;
    if (spans.empty() || t != current) {
      spans.push_back(1);
      current = t;
    } else {
      ++spans.back();
    }
  }
  return spans;
}

std::vector<int> language_spans(const TaggedSentence& sentence) {
  return language_spans(lid_sequence(sentence));
}

std::optional<double> burstiness_of_spans(std::span<const int> spans) {
  if (spans.size() < 2) return std::nullopt;
  const double n = static_cast<double>(spans.size());
  double mean = 0.0;
  for (int s : spans) mean += s;
  mean /= n;
  double ss = 0.0;
  for (int s : spans) ss += (s - mean) * (s - mean);
  const double sigma = std::sqrt(ss / (n - 1.0));
  return (sigma - mean) / (sigma + mean);
}

std::optional<double> burstiness(std::span<const LanguageTag> lids) {
  const auto spans = language_spans(lids);
  return burstiness_of_spans(spans);
}

std::optional<double> burstiness(const TaggedSentence& sentence) {
  return burstiness(lid_sequence(sentence));
}

PosLanguageCounts count_pos_by_language(const TaggedSentence& sentence) {
  PosLanguageCounts counts;
  for (const Token& t : sentence.tokens) {
    if (!is_language(t.lid)) continue;
    if (!t.pos) {
      throw ValidationError("sentence '" + sentence.id + "': token '" +
                            t.surface + "' has no PoS tag");
    }
    auto& bucket =
        t.lid == LanguageTag::kLangA ? counts.lang_a : counts.lang_b;
    ++bucket[static_cast<std::size_t>(*t.pos)];
  }
  return counts;
}

std::optional<double> symcom_from_counts(int lang_a, int lang_b) {
  const int total = lang_a + lang_b;
  if (total == 0) return std::nullopt;
  return static_cast<double>(lang_a - lang_b) / total;
}

std::optional<double> symcom_pos(const TaggedSentence& sentence, PosTag pos) {
  const auto counts = count_pos_by_language(sentence);
  const auto i = static_cast<std::size_t>(pos);
  return symcom_from_counts(counts.lang_a[i], counts.lang_b[i]);
}

std::optional<double> symcom_sentence(const PosLanguageCounts& counts) {
  int total = 0;
  for (std::size_t i = 0; i < kPosTagCount; ++i) {
    total += counts.lang_a[i] + counts.lang_b[i];
  }
  if (total == 0) return std::nullopt;
  double score = 0.0;
  for (std::size_t i = 0; i < kPosTagCount; ++i) {
    const int group = counts.lang_a[i] + counts.lang_b[i];
    if (group == 0) continue;
    score += static_cast<double>(std::abs(counts.lang_a[i] - counts.lang_b[i])) /
             total;
  }
  return score;
}

std::optional<double> symcom_sentence(const TaggedSentence& sentence) {
  return symcom_sentence(count_pos_by_language(sentence));
}

bool has_pos_tags(const TaggedSentence& sentence) {
  return std::all_of(sentence.tokens.begin(), sentence.tokens.end(),
                     [](const Token& t) { return !is_language(t.lid) || t.pos; });
}

double fertility(std::span<const TaggedSentence> sentences,
                 const Segmenter& segmenter) {
  std::size_t words = 0;
  std::size_t pieces = 0;
  for (const TaggedSentence& s : sentences) {
    for (const Token& t : s.tokens) {
      try {
        pieces += segmenter(t.surface);
      } catch (const std::exception& e) {
        throw ValidationError("segmenter failed on '" + t.surface +
                              "': " + e.what());
      }
      ++words;
    }
  }
  if (words == 0) throw ValidationError("fertility of an empty corpus");
  return static_cast<double>(pieces) / static_cast<double>(words);
}

WordPieceSegmenter::WordPieceSegmenter(std::vector<std::string> vocabulary) {
  for (auto& piece : vocabulary) {
    if (piece.empty()) continue;
    const std::size_t bytes =
        piece.rfind("##", 0) == 0 ? piece.size() - 2 : piece.size();
    max_piece_bytes_ = std::max(max_piece_bytes_, bytes);
    vocab_.insert(std::move(piece));
  }
}

WordPieceSegmenter WordPieceSegmenter::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) vocab.push_back(line);
  }
  return WordPieceSegmenter(std::move(vocab));
}

std::vector<std::string> WordPieceSegmenter::segment(
    std::string_view word) const {
  auto is_boundary = [&](std::size_t pos) {
    return pos == word.size() ||
           (static_cast<unsigned char>(word[pos]) & 0xC0) != 0x80;
  };
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = std::min(word.size(), start + max_piece_bytes_);
    std::string found;
    for (; end > start; --end) {
      if (!is_boundary(end)) continue;
      std::string candidate(word.substr(start, end - start));
      if (start > 0) candidate.insert(0, "##");
      if (vocab_.contains(candidate)) {
        found = std::move(candidate);
        break;
      }
    }
    if (found.empty()) return {"[UNK]"};
    pieces.push_back(std::move(found));
    start = end;
  }
  return pieces;
}

MetricRow metric_row(const TaggedSentence& sentence) {
  MetricRow row;
  row.sample_id = sentence.id;
  row.length = static_cast<int>(sentence.tokens.size());
  const auto lids = lid_sequence(sentence);
  row.cmi = cmi(lids);
  row.switch_points = switch_points(lids);
  row.burstiness = burstiness(lids);

  const bool any_language = std::any_of(
      sentence.tokens.begin(), sentence.tokens.end(),
      [](const Token& t) { return is_language(t.lid); });
  if (any_language && has_pos_tags(sentence)) {
    const auto counts = count_pos_by_language(sentence);
    row.symcom_sentence = symcom_sentence(counts);
    for (std::size_t i = 0; i < kPosTagCount; ++i) {
      row.symcom_by_pos[i] =
          symcom_from_counts(counts.lang_a[i], counts.lang_b[i]);
    }
  }
  return row;
}

std::vector<MetricRow> metric_rows_serial(
    std::span<const TaggedSentence> corpus,
    const ExternalScores* external_scores) {
  check_external_ids(corpus, external_scores);
  std::vector<MetricRow> rows;
  rows.reserve(corpus.size());
  for (const TaggedSentence& s : corpus) {
    rows.push_back(metric_row(s));
    attach_external(rows.back(), external_scores);
  }
  return rows;
}

std::vector<MetricRow> metric_rows(std::span<const TaggedSentence> corpus,
                                   const ExternalScores* external_scores) {
  check_external_ids(corpus, external_scores);
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  std::vector<MetricRow> rows(corpus.size());
  std::vector<std::exception_ptr> failures(corpus.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      rows[i] = metric_row(corpus[i]);
      attach_external(rows[i], external_scores);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return rows;
}

std::vector<std::string> metric_csv_header() {
  std::vector<std::string> h = {"id",         "length",     "cmi",
                                "switch_points", "burstiness", "symcom_sentence"};
  for (PosTag tag : kAllPosTags) {
    h.push_back("symcom_" + std::string(to_string(tag)));
  }
  h.emplace_back("external_score");
  return h;
}

std::vector<std::string> metric_csv_fields(const MetricRow& row) {
  std::vector<std::string> f;
  f.reserve(7 + kPosTagCount);
  f.push_back(row.sample_id);
  f.push_back(std::to_string(row.length));
  f.push_back(csv::format_fixed(row.cmi, kCmiDecimals));
  f.push_back(std::to_string(row.switch_points));
  f.push_back(csv::format_optional(row.burstiness, kRealDecimals));
  f.push_back(csv::format_optional(row.symcom_sentence, kRealDecimals));
  for (const auto& v : row.symcom_by_pos) {
    f.push_back(csv::format_optional(v, kRealDecimals));
  }
  f.push_back(csv::format_optional(row.external_score, kRealDecimals));
  return f;
}

void write_metric_rows(std::ostream& out, std::span<const MetricRow> rows) {
  out << csv::join(metric_csv_header()) << '\n';
  for (const MetricRow& r : rows) out << csv::join(metric_csv_fields(r)) << '\n';
}

std::vector<MetricRow> read_metric_rows(std::istream& in,
                                        std::string_view origin) {
  const csv::Table table = csv::read(in, origin);
  const auto header = metric_csv_header();
  std::vector<std::size_t> cols;
  cols.reserve(header.size());
  for (const auto& name : header) {
    cols.push_back(table.require_column(name, origin));
  }
  std::vector<MetricRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::string where =
        std::string(origin) + ":" + std::to_string(table.line_numbers[r]);
    try {
      MetricRow row;
      row.sample_id = f[cols[0]];
      row.length = static_cast<int>(csv::parse_double(f[cols[1]], "length"));
      row.cmi = csv::parse_double(f[cols[2]], "cmi");
      row.switch_points =
          static_cast<int>(csv::parse_double(f[cols[3]], "switch_points"));
      row.burstiness = csv::parse_optional_double(f[cols[4]], "burstiness");
      row.symcom_sentence =
          csv::parse_optional_double(f[cols[5]], "symcom_sentence");
      for (std::size_t i = 0; i < kPosTagCount; ++i) {
        row.symcom_by_pos[i] =
            csv::parse_optional_double(f[cols[6 + i]], header[6 + i]);
      }
      row.external_score =
          csv::parse_optional_double(f[cols[6 + kPosTagCount]], "external_score");
      rows.push_back(std::move(row));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return rows;
}

ExternalScores read_external_scores(std::istream& in,
                                    std::string_view origin) {
  const csv::Table table = csv::read(in, origin);
  const std::size_t id_col = table.require_column("id", origin);
  const std::size_t score_col = table.require_column("score", origin);
  ExternalScores scores;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::string where =
        std::string(origin) + ":" + std::to_string(table.line_numbers[r]);
    double v = 0.0;
    try {
      v = csv::parse_double(f[score_col], "score");
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!scores.emplace(f[id_col], v).second) {
      throw ValidationError(where + ": duplicate id '" + f[id_col] + "'");
    }
  }
  return scores;
}

}  // namespace cmlab
