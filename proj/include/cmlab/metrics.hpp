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

// Code-mixing metrics over language-tagged sentences.
//
// Conventions shared by every metric here:
//  * Neutral tokens are transparent to spans and switch points: they are
//    dropped from the LID sequence before runs are formed.
//  * SyMCoM is signed with LangA positive.
//  * Burstiness uses the sample (n - 1) standard deviation of span lengths.

#ifndef CMLAB_METRICS_HPP_
#define CMLAB_METRICS_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cmlab/corpus.hpp"

namespace cmlab {

std::vector<LanguageTag> lid_sequence(const TaggedSentence& sentence);

// Code-Mixing Index in [0, 100]; 0 when every token is Neutral.
double cmi(std::span<const LanguageTag> lids);
double cmi(const TaggedSentence& sentence);

int switch_points(std::span<const LanguageTag> lids);
int switch_points(const TaggedSentence& sentence);

// Lengths of maximal same-language runs after dropping Neutral tokens.
std::vector<int> language_spans(std::span<const LanguageTag> lids);
std::vector<int> language_spans(const TaggedSentence& sentence);

// (sigma - mean) / (sigma + mean) over span lengths; nullopt for < 2 spans.
std::optional<double> burstiness_of_spans(std::span<const int> spans);
std::optional<double> burstiness(std::span<const LanguageTag> lids);
std::optional<double> burstiness(const TaggedSentence& sentence);

// Per-PoS token counts for each language; Neutral tokens are not counted.
struct PosLanguageCounts {
  std::array<int, kPosTagCount> lang_a{};
  std::array<int, kPosTagCount> lang_b{};
};

// Throws ValidationError if a LangA/LangB token has no PoS tag.
PosLanguageCounts count_pos_by_language(const TaggedSentence& sentence);

// (count_A - count_B) / (count_A + count_B); nullopt when both are zero.
std::optional<double> symcom_from_counts(int lang_a, int lang_b);
std::optional<double> symcom_pos(const TaggedSentence& sentence, PosTag pos);

// Token-count-weighted mean of |SyMCoM_pos| over the PoS tags present;
// nullopt when the sentence has no language-bearing tokens.
std::optional<double> symcom_sentence(const PosLanguageCounts& counts);
std::optional<double> symcom_sentence(const TaggedSentence& sentence);

// True when every LangA/LangB token carries a PoS tag.
bool has_pos_tags(const TaggedSentence& sentence);

// Returns the number of subword pieces for one word.
using Segmenter = std::function<std::size_t(std::string_view)>;

// Total subword pieces over total words. Segmenter exceptions are rethrown
// as ValidationError naming the offending surface.
double fertility(std::span<const TaggedSentence> sentences,
                 const Segmenter& segmenter);

// Greedy longest-match-first WordPiece segmentation over a fixed vocabulary.
// Continuation pieces are looked up with a "##" prefix; a word that cannot
// be covered counts as a single unknown piece.
class WordPieceSegmenter {
 public:
  explicit WordPieceSegmenter(std::vector<std::string> vocabulary);
  static WordPieceSegmenter from_file(const std::string& path);

  std::vector<std::string> segment(std::string_view word) const;
  std::size_t operator()(std::string_view word) const {
    return segment(word).size();
  }

 private:
  std::unordered_set<std::string> vocab_;
  std::size_t max_piece_bytes_ = 0;
};

struct MetricRow {
  std::string sample_id;
  int length = 0;
  double cmi = 0.0;
  int switch_points = 0;
  std::optional<double> burstiness;
  std::optional<double> symcom_sentence;
  std::array<std::optional<double>, kPosTagCount> symcom_by_pos{};
  std::optional<double> external_score;

  bool operator==(const MetricRow&) const = default;
};

// Metrics for one sentence. SyMCoM fields are filled only when every
// language token carries a PoS tag; otherwise they are absent. Back-translated
// sentences are the usual partially tagged case.
MetricRow metric_row(const TaggedSentence& sentence);

using ExternalScores = std::map<std::string, double, std::less<>>;

// One row per sentence in input order. Throws ValidationError if
// `external_scores` names an id that is not in the corpus.
//
// metric_rows fans out over sentences with OpenMP; metric_rows_serial is the
// single-threaded reference it is tested and benchmarked against.
std::vector<MetricRow> metric_rows(std::span<const TaggedSentence> corpus,
                                   const ExternalScores* external_scores);
std::vector<MetricRow> metric_rows_serial(
    std::span<const TaggedSentence> corpus,
    const ExternalScores* external_scores);

// CSV layout: id,length,cmi,switch_points,burstiness,symcom_sentence,
// symcom_<POS> for every tag in kAllPosTags order, external_score.
// Absent values are empty fields; CMI is written to two decimals.
std::vector<std::string> metric_csv_header();
std::vector<std::string> metric_csv_fields(const MetricRow& row);
void write_metric_rows(std::ostream& out, std::span<const MetricRow> rows);
std::vector<MetricRow> read_metric_rows(std::istream& in,
                                        std::string_view origin);

// Reads an `id,score` CSV.
ExternalScores read_external_scores(std::istream& in, std::string_view origin);

}  // namespace cmlab

#endif  // CMLAB_METRICS_HPP_
