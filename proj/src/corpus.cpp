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

#include "cmlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "cmlab/csv.hpp"
#include "cmlab/error.hpp"

namespace cmlab {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kPosTagCount> kPosNames = {
    "ADJ",  "ADP",  "ADV",   "AUX",   "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Decodes the next UTF-8 codepoint starting at `i`; returns -1 on an invalid
// sequence and advances by one byte in that case.
long next_codepoint(std::string_view s, std::size_t& i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  int extra = 0;
  long cp = 0;
  if (lead < 0x80) {
    ++i;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++i;
    return -1;
  }
  if (i + extra >= s.size()) {
    ++i;
    return -1;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto cont = static_cast<unsigned char>(s[i + k]);
    if ((cont & 0xC0) != 0x80) {
      ++i;
      return -1;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  i += extra + 1;
  return cp;
}

Source parse_source(std::string_view s, std::string_view where) {
  if (s == "gcm") return Source::kSynthetic;
  if (s == "osn") return Source::kSocial;
  throw ValidationError(std::string(where) + ": unknown source '" +
                        std::string(s) + "'");
}

ScriptForm parse_script(std::string_view s, std::string_view where) {
  if (s == "roman") return ScriptForm::kRomanised;
  if (s == "norm") return ScriptForm::kNormalised;
  throw ValidationError(std::string(where) + ": unknown script '" +
                        std::string(s) + "'");
}

Perturbation parse_perturbation(std::string_view s, std::string_view where) {
  if (s == "swap") return Perturbation::kSwap;
  if (s == "delete") return Perturbation::kDelete;
  if (s == "backtranslate") return Perturbation::kBackTranslate;
  throw ValidationError(std::string(where) + ": unknown perturbation '" +
                        std::string(s) + "'");
}

Label parse_label(std::string_view s, std::string_view where) {
  if (s == "ABUSIVE") return Exclusion::kAbusive;
  if (s == "MONO") return Exclusion::kMonolingual;
  if (s == "OTHERLANG") return Exclusion::kOtherLanguage;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(std::string(where) + ": invalid label '" +
                          std::string(s) + "'");
  }
  if (value < 1 || value > 5) {
    throw ValidationError(std::string(where) + ": rating " +
                          std::to_string(value) + " out of range 1..5");
  }
  return value;
}

Label label_from_json(const json& j, std::string_view where) {
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 1 || v > 5) {
      throw ValidationError(std::string(where) + ": rating " +
                            std::to_string(v) + " out of range 1..5");
    }
    return static_cast<int>(v);
  }
  if (j.is_string()) return parse_label(j.get<std::string>(), where);
  throw ValidationError(std::string(where) + ": label must be an integer or "
                        "exclusion flag");
}

json label_to_json(const Label& label) {
  if (const int* r = std::get_if<int>(&label)) return *r;
  return std::string(to_string(std::get<Exclusion>(label)));
}

std::string label_to_string(const Label& label) {
  if (const int* r = std::get_if<int>(&label)) return std::to_string(*r);
  return std::string(to_string(std::get<Exclusion>(label)));
}

const json& require(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(std::string(where) + ": missing field '" + key +
                          "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) {
    throw ValidationError(std::string(where) + ": field '" + key +
                          "' must be a string");
  }
  return v.get<std::string>();
}

TaggedSentence sentence_from_json(const json& rec, std::string_view where,
                                  std::vector<std::string>* warnings) {
  if (!rec.is_object()) {
    throw ValidationError(std::string(where) + ": record is not an object");
  }
  TaggedSentence s;
  s.id = require_string(rec, "id", where);
  s.text = require_string(rec, "text", where);
  s.source = parse_source(require_string(rec, "source", where), where);
  s.script = parse_script(require_string(rec, "script", where), where);
  if (auto it = rec.find("perturbation"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw ValidationError(std::string(where) +
                            ": perturbation must be a string");
    }
    s.perturbation = parse_perturbation(it->get<std::string>(), where);
  }
  const json& toks = require(rec, "tokens", where);
  if (!toks.is_array()) {
    throw ValidationError(std::string(where) + ": tokens must be an array");
  }
  s.tokens.reserve(toks.size());
  for (const json& t : toks) {
    if (!t.is_object()) {
      throw ValidationError(std::string(where) + ": token is not an object");
    }
    Token tok;
    tok.surface = require_string(t, "surface", where);
    if (auto it = t.find("lid"); it != t.end()) {
      if (!it->is_string()) {
        throw ValidationError(std::string(where) + ": lid must be a string");
      }
      try {
        tok.lid = parse_language_tag(it->get<std::string>());
      } catch (const ValidationError& e) {
        throw ValidationError(std::string(where) + ": " + e.what());
      }
    } else if (s.script == ScriptForm::kNormalised) {
      tok.lid = script_lid(tok.surface);
    } else {
      throw ValidationError(std::string(where) +
                            ": token without lid in romanised record");
    }
    if (auto it = t.find("pos"); it != t.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ValidationError(std::string(where) + ": pos must be a string");
      }
      std::vector<std::string> local;
      tok.pos = parse_pos_tag(it->get<std::string>(), &local);
      if (warnings) {
        for (auto& w : local) warnings->push_back(std::string(where) + ": " + w);
      }
    }
    s.tokens.push_back(std::move(tok));
  }
  if (auto it = rec.find("ratings"); it != rec.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 3) {
      throw ValidationError(std::string(where) +
                            ": ratings must be an array of exactly 3 labels");
    }
    std::array<Label, 3> labels;
    for (std::size_t k = 0; k < 3; ++k) {
      labels[k] = label_from_json((*it)[k], where);
    }
    s.labels = labels;
  }
  try {
    validate_sentence(s);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(where) + ": " + e.what());
  }
  return s;
}

}  // namespace

std::string_view to_string(PosTag tag) {
  return kPosNames[static_cast<std::size_t>(tag)];
}

std::string_view to_string(LanguageTag tag) {
  switch (tag) {
    case LanguageTag::kLangA: return "l1";
    case LanguageTag::kLangB: return "l2";
    case LanguageTag::kNeutral: return "neutral";
  }
  return "neutral";
}

std::string_view to_string(Source s) {
  return s == Source::kSynthetic ? "gcm" : "osn";
}

std::string_view to_string(ScriptForm s) {
  return s == ScriptForm::kRomanised ? "roman" : "norm";
}

std::string_view to_string(Perturbation p) {
  switch (p) {
    case Perturbation::kSwap: return "swap";
    case Perturbation::kDelete: return "delete";
    case Perturbation::kBackTranslate: return "backtranslate";
  }
  return "swap";
}

std::string_view to_string(Exclusion e) {
  switch (e) {
    case Exclusion::kAbusive: return "ABUSIVE";
    case Exclusion::kMonolingual: return "MONO";
    case Exclusion::kOtherLanguage: return "OTHERLANG";
  }
  return "ABUSIVE";
}

PosTag parse_pos_tag(std::string_view s, std::vector<std::string>* warnings) {
  for (std::size_t i = 0; i < kPosNames.size(); ++i) {
    if (kPosNames[i] == s) return kAllPosTags[i];
  }
  if (s == "PPRON") {
    if (warnings) warnings->push_back("PoS tag PPRON read as PROPN");
    return PosTag::PROPN;
  }
  if (warnings) {
    warnings->push_back("unknown PoS tag '" + std::string(s) + "' read as X");
  }
  return PosTag::X;
}

LanguageTag parse_language_tag(std::string_view s) {
  if (s == "l1") return LanguageTag::kLangA;
  if (s == "l2") return LanguageTag::kLangB;
  if (s == "neutral") return LanguageTag::kNeutral;
  throw ValidationError("unknown lid '" + std::string(s) + "'");
}

bool AnnotationTriple::has_exclusion() const {
  return std::any_of(labels.begin(), labels.end(), [](const Label& l) {
    return std::holds_alternative<Exclusion>(l);
  });
}

std::array<int, 3> AnnotationTriple::ratings() const {
  std::array<int, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int* r = std::get_if<int>(&labels[i]);
    if (!r) {
      throw ValidationError("sample '" + sample_id +
                            "' carries an exclusion flag");
    }
    out[i] = *r;
  }
  return out;
}

std::string join_surfaces(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i].surface;
  }
  return out;
}

void validate_token(const Token& token) {
  if (token.surface.empty()) throw ValidationError("empty token surface");
  if (std::any_of(token.surface.begin(), token.surface.end(), is_ascii_space)) {
    throw ValidationError("token surface '" + token.surface +
                          "' contains whitespace");
  }
}

void validate_labels(const std::array<Label, 3>& labels) {
  for (const Label& l : labels) {
    if (const int* r = std::get_if<int>(&l); r && (*r < 1 || *r > 5)) {
      throw ValidationError("rating " + std::to_string(*r) +
                            " out of range 1..5");
    }
  }
}

void validate_sentence(const TaggedSentence& sentence) {
  if (sentence.id.empty()) throw ValidationError("empty sentence id");
  if (sentence.tokens.empty()) {
    throw ValidationError("sentence '" + sentence.id + "' has no tokens");
  }
  for (const Token& t : sentence.tokens) validate_token(t);
  if (sentence.labels) validate_labels(*sentence.labels);
}

LanguageTag script_lid(std::string_view surface) {
  bool latin = false;
  std::size_t i = 0;
  while (i < surface.size()) {
    const long cp = next_codepoint(surface, i);
    if (cp >= 0x0900 && cp <= 0x097F) return LanguageTag::kLangA;
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) latin = true;
  }
  return latin ? LanguageTag::kLangB : LanguageTag::kNeutral;
}

RatingSummary summarize(const std::array<int, 3>& r) {
  for (int v : r) {
    if (v < 1 || v > 5) {
      throw ValidationError("rating " + std::to_string(v) +
                            " out of range 1..5");
    }
  }
  RatingSummary s;
  s.average = (r[0] + r[1] + r[2]) / 3.0;
  s.disagreement =
      std::abs(r[0] - r[1]) + std::abs(r[0] - r[2]) + std::abs(r[1] - r[2]);
  return s;
}

RatingSummary summarize(const AnnotationTriple& triple) {
  return summarize(triple.ratings());
}

bool keep_for_analysis(const AnnotationTriple& triple) {
  return !triple.has_exclusion();
}

CorpusLoad parse_corpus(std::istream& in, std::string_view origin) {
  CorpusLoad out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where =
        std::string(origin) + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed JSON (" + e.what() + ")");
    }
    TaggedSentence s = sentence_from_json(rec, where, &out.warnings);
    if (!seen.insert(s.id).second) {
      throw ValidationError(where + ": duplicate id '" + s.id + "'");
    }
    out.sentences.push_back(std::move(s));
  }
  if (out.sentences.empty()) {
    throw ValidationError(std::string(origin) + ": empty corpus file");
  }
  return out;
}

CorpusLoad load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_corpus(in, path.string());
}

std::string to_json_line(const TaggedSentence& s) {
  json rec = json::object();
  rec["id"] = s.id;
  rec["text"] = s.text;
  json toks = json::array();
  for (const Token& t : s.tokens) {
    json jt = json::object();
    jt["surface"] = t.surface;
    jt["lid"] = std::string(to_string(t.lid));
    if (t.pos) jt["pos"] = std::string(to_string(*t.pos));
    toks.push_back(std::move(jt));
  }
  rec["tokens"] = std::move(toks);
  rec["source"] = std::string(to_string(s.source));
  rec["script"] = std::string(to_string(s.script));
  if (s.perturbation) {
    rec["perturbation"] = std::string(to_string(*s.perturbation));
  }
  if (s.labels) {
    json labels = json::array();
    for (const Label& l : *s.labels) labels.push_back(label_to_json(l));
    rec["ratings"] = std::move(labels);
  }
  return rec.dump();
}

void write_corpus(std::ostream& out, std::span<const TaggedSentence> sentences) {
  for (const TaggedSentence& s : sentences) out << to_json_line(s) << '\n';
}

void save_corpus(const std::filesystem::path& path,
                 std::span<const TaggedSentence> sentences) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_corpus(out, sentences);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<AnnotationTriple> parse_annotations(std::istream& in,
                                                std::string_view origin) {
  const csv::Table table = csv::read(in, origin);
  const std::size_t id_col = table.require_column("sample_id", origin);
  const std::array<std::size_t, 3> cols = {
      table.require_column("r1", origin), table.require_column("r2", origin),
      table.require_column("r3", origin)};
  std::vector<AnnotationTriple> out;
  out.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where =
        std::string(origin) + ":" + std::to_string(table.line_numbers[r]);
    AnnotationTriple t;
    t.sample_id = row[id_col];
    if (t.sample_id.empty()) throw ValidationError(where + ": empty sample_id");
    for (std::size_t k = 0; k < 3; ++k) {
      t.labels[k] = parse_label(row[cols[k]], where);
    }
    if (!seen.insert(t.sample_id).second) {
      throw ValidationError(where + ": duplicate sample_id '" + t.sample_id +
                            "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<AnnotationTriple> load_annotations(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_annotations(in, path.string());
}

void write_annotations(std::ostream& out,
                       std::span<const AnnotationTriple> triples) {
  out << "sample_id,r1,r2,r3\n";
  for (const AnnotationTriple& t : triples) {
    out << csv::escape(t.sample_id);
    for (const Label& l : t.labels) out << ',' << label_to_string(l);
    out << '\n';
  }
}

}  // namespace cmlab
