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

// Core data model: tagged code-mixed sentences, human annotations, and the
// on-disk corpus (JSON lines) and annotation (CSV) formats.

#ifndef CMLAB_CORPUS_HPP_
#define CMLAB_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cmlab {

// LangA is the first language of the pair (Hindi in the en-hi setting),
// LangB the second (English). Neutral covers punctuation, numerals, URLs,
// hashtags, mentions and emoji.
enum class LanguageTag : std::uint8_t { kLangA, kLangB, kNeutral };

// Universal Dependencies coarse tag set. Order here fixes column order in
// every CSV output.
enum class PosTag : std::uint8_t {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM,
  PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X
};
inline constexpr std::size_t kPosTagCount = 17;
inline constexpr std::array<PosTag, kPosTagCount> kAllPosTags = {
    PosTag::ADJ,  PosTag::ADP,   PosTag::ADV,   PosTag::AUX,   PosTag::CCONJ,
    PosTag::DET,  PosTag::INTJ,  PosTag::NOUN,  PosTag::NUM,   PosTag::PART,
    PosTag::PRON, PosTag::PROPN, PosTag::PUNCT, PosTag::SCONJ, PosTag::SYM,
    PosTag::VERB, PosTag::X};

std::string_view to_string(PosTag tag);
std::string_view to_string(LanguageTag tag);  // "l1", "l2", "neutral"

// Unknown strings map to X and append a warning; "PPRON" is an alias of
// PROPN and is also noted in `warnings`.
PosTag parse_pos_tag(std::string_view s, std::vector<std::string>* warnings);
LanguageTag parse_language_tag(std::string_view s);

struct Token {
  std::string surface;
  LanguageTag lid = LanguageTag::kNeutral;
  std::optional<PosTag> pos;

  bool operator==(const Token&) const = default;
};

enum class Source : std::uint8_t { kSynthetic, kSocial };
enum class ScriptForm : std::uint8_t { kRomanised, kNormalised };
enum class Perturbation : std::uint8_t { kSwap, kDelete, kBackTranslate };

std::string_view to_string(Source s);        // "gcm" / "osn"
std::string_view to_string(ScriptForm s);    // "roman" / "norm"
std::string_view to_string(Perturbation p);  // "swap" / "delete" / "backtranslate"

enum class Exclusion : std::uint8_t { kAbusive, kMonolingual, kOtherLanguage };
std::string_view to_string(Exclusion e);  // "ABUSIVE" / "MONO" / "OTHERLANG"

// A single annotator judgement: either a rating in 1..5 or an exclusion flag.
using Label = std::variant<int, Exclusion>;

struct AnnotationTriple {
  std::string sample_id;
  std::array<Label, 3> labels;

  bool has_exclusion() const;
  // Throws ValidationError if any label is an exclusion.
  std::array<int, 3> ratings() const;

  bool operator==(const AnnotationTriple&) const = default;
};

// Three ratings condensed to their mean and the sum of absolute pairwise
// differences. The latter always equals 2 * (max - min).
struct RatingSummary {
  double average = 0.0;
  int disagreement = 0;

  bool operator==(const RatingSummary&) const = default;
};

struct TaggedSentence {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  Source source = Source::kSynthetic;
  ScriptForm script = ScriptForm::kRomanised;
  std::optional<Perturbation> perturbation;
  // Ratings attached inline in the corpus file, if any.
  std::optional<std::array<Label, 3>> labels;

  bool operator==(const TaggedSentence&) const = default;
};

// Surfaces joined by single spaces.
std::string join_surfaces(std::span<const Token> tokens);

// Throws ValidationError for an empty surface or one containing whitespace.
void validate_token(const Token& token);
// Throws ValidationError for an empty id, empty token list or bad token.
void validate_sentence(const TaggedSentence& sentence);
// Throws ValidationError if a rating lies outside 1..5.
void validate_labels(const std::array<Label, 3>& labels);

// Script-based language identification for normalised text: any Devanagari
// codepoint (U+0900..U+097F) gives LangA, otherwise any basic Latin letter
// gives LangB, otherwise Neutral. Invalid UTF-8 bytes are skipped.
LanguageTag script_lid(std::string_view surface);

RatingSummary summarize(const std::array<int, 3>& ratings);
// Throws ValidationError if the triple carries an exclusion flag.
RatingSummary summarize(const AnnotationTriple& triple);

// True when every label is a rating; one exclusion drops the sample.
bool keep_for_analysis(const AnnotationTriple& triple);

struct CorpusLoad {
  std::vector<TaggedSentence> sentences;
  std::vector<std::string> warnings;
};

CorpusLoad parse_corpus(std::istream& in, std::string_view origin);
CorpusLoad load_corpus(const std::filesystem::path& path);

std::string to_json_line(const TaggedSentence& sentence);
void write_corpus(std::ostream& out, std::span<const TaggedSentence> sentences);
void save_corpus(const std::filesystem::path& path,
                 std::span<const TaggedSentence> sentences);

std::vector<AnnotationTriple> parse_annotations(std::istream& in,
                                                std::string_view origin);
std::vector<AnnotationTriple> load_annotations(
    const std::filesystem::path& path);
void write_annotations(std::ostream& out,
                       std::span<const AnnotationTriple> triples);

}  // namespace cmlab

#endif  // CMLAB_CORPUS_HPP_
