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

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "cmlab/error.hpp"
#include "test_util.hpp"

namespace cmlab {
namespace {

using ::cmlab::testing::A;
using ::cmlab::testing::B;
using ::cmlab::testing::N;

constexpr char kGoodLine[] =
    R"({"id":"g1","text":"mera phone","source":"gcm","script":"roman",)"
    R"("tokens":[{"surface":"mera","lid":"l1","pos":"PRON"},)"
    R"({"surface":"phone","lid":"l2","pos":"NOUN"}]})";

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_corpus(in, "c.jsonl");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseCorpus, ReadsTokensAndMetadata) {
  std::istringstream in(std::string(kGoodLine) + "\n");
  const CorpusLoad load = parse_corpus(in, "c.jsonl");
  ASSERT_EQ(load.sentences.size(), 1u);
  const TaggedSentence& s = load.sentences[0];
  EXPECT_EQ(s.id, "g1");
  EXPECT_EQ(s.source, Source::kSynthetic);
  ASSERT_EQ(s.tokens.size(), 2u);
  EXPECT_EQ(s.tokens[0].lid, A);
  EXPECT_EQ(s.tokens[0].pos, PosTag::PRON);
  EXPECT_EQ(s.tokens[1].lid, B);
  EXPECT_TRUE(load.warnings.empty());
}

TEST(ParseCorpus, MalformedJsonNamesTheLine) {
  const std::string err = error_of(std::string(kGoodLine) + "\n{not json\n");
  EXPECT_NE(err.find("c.jsonl:2"), std::string::npos) << err;
}

TEST(ParseCorpus, DuplicateIdIsRejected) {
  const std::string err =
      error_of(std::string(kGoodLine) + "\n" + kGoodLine + "\n");
  EXPECT_NE(err.find("duplicate id 'g1'"), std::string::npos) << err;
  EXPECT_NE(err.find("c.jsonl:2"), std::string::npos) << err;
}

TEST(ParseCorpus, RatingOutsideRangeIsRejected) {
  std::string line = kGoodLine;
  line.insert(line.size() - 1, R"(,"ratings":[3,7,2])");
  const std::string err = error_of(line);
  EXPECT_NE(err.find("rating 7"), std::string::npos) << err;
}

TEST(ParseCorpus, MissingFieldsAndEmptyFilesAreErrors) {
  EXPECT_NE(error_of(R"({"id":"x","text":"a","source":"gcm","script":"roman"})")
                .find("tokens"),
            std::string::npos);
  EXPECT_NE(error_of("\n\n").find("empty corpus"), std::string::npos);
  EXPECT_NE(error_of(R"({"id":"x","text":"a","source":"gcm","script":"roman","tokens":[]})"),
            "");
  EXPECT_NE(error_of(R"({"id":"x","text":"a","source":"tv","script":"roman","tokens":[{"surface":"a","lid":"l1"}]})")
                .find("unknown source"),
            std::string::npos);
}

TEST(ParseCorpus, RomanisedTokenNeedsLid) {
  EXPECT_NE(
      error_of(R"({"id":"x","text":"a","source":"gcm","script":"roman","tokens":[{"surface":"a"}]})")
          .find("without lid"),
      std::string::npos);
}

TEST(ParseCorpus, NormalisedTokenFallsBackToScript) {
  std::istringstream in(
      R"({"id":"n","text":"x","source":"osn","script":"norm","tokens":[)"
      R"({"surface":"मेरा"},{"surface":"phone"},{"surface":"!"}]})");
  const auto load = parse_corpus(in, "n.jsonl");
  const auto& t = load.sentences[0].tokens;
  EXPECT_EQ(t[0].lid, A);
  EXPECT_EQ(t[1].lid, B);
  EXPECT_EQ(t[2].lid, N);
}

TEST(PosTags, AliasAndUnknownTagsWarn) {
  std::vector<std::string> warnings;
  EXPECT_EQ(parse_pos_tag("PPRON", &warnings), PosTag::PROPN);
  EXPECT_EQ(parse_pos_tag("FOO", &warnings), PosTag::X);
  EXPECT_EQ(parse_pos_tag("VERB", &warnings), PosTag::VERB);
  EXPECT_EQ(warnings.size(), 2u);
  for (PosTag p : kAllPosTags) {
    EXPECT_EQ(parse_pos_tag(to_string(p), nullptr), p);
  }
}

TEST(ScriptLid, ClassifiesByCodepointRange) {
  EXPECT_EQ(script_lid("\xE0\xA4\xAE\xE0\xA5\x87\xE0\xA4\xB0\xE0\xA4\xBE"), A);
  EXPECT_EQ(script_lid("office"), B);
  EXPECT_EQ(script_lid("2024"), N);
  EXPECT_EQ(script_lid("#"), N);
  EXPECT_EQ(script_lid("\xF0\x9F\x98\x80"), N);  // emoji
  EXPECT_EQ(script_lid("a\xE0\xA4\xAE"), A);      // Devanagari wins
  EXPECT_EQ(script_lid("\xFF\xFE"), N);           // invalid bytes skipped
}

TEST(Summarize, WorkedExamples) {
  EXPECT_EQ(summarize(std::array<int, 3>{2, 3, 4}), (RatingSummary{3.0, 4}));
  EXPECT_EQ(summarize(std::array<int, 3>{5, 5, 5}), (RatingSummary{5.0, 0}));
  EXPECT_EQ(summarize(std::array<int, 3>{1, 5, 1}).disagreement, 8);
  EXPECT_THROW(summarize(std::array<int, 3>{0, 3, 3}), ValidationError);
}

TEST(Summarize, DisagreementIsTwiceRangeForAllTriples) {
  for (int a = 1; a <= 5; ++a) {
    for (int b = 1; b <= 5; ++b) {
      for (int c = 1; c <= 5; ++c) {
        const auto s = summarize(std::array<int, 3>{a, b, c});
        const int pairwise = std::abs(a - b) + std::abs(a - c) + std::abs(b - c);
        EXPECT_EQ(s.disagreement, pairwise);
        EXPECT_EQ(s.disagreement, 2 * (std::max({a, b, c}) - std::min({a, b, c})));
        EXPECT_DOUBLE_EQ(s.average, (a + b + c) / 3.0);
      }
    }
  }
}

TEST(Annotations, ExclusionDropsSample) {
  AnnotationTriple t{"x", {Label{3}, Label{Exclusion::kAbusive}, Label{4}}};
  EXPECT_TRUE(t.has_exclusion());
  EXPECT_FALSE(keep_for_analysis(t));
  EXPECT_THROW(summarize(t), ValidationError);
  AnnotationTriple ok{"y", {Label{3}, Label{4}, Label{5}}};
  EXPECT_TRUE(keep_for_analysis(ok));
  EXPECT_EQ(ok.ratings(), (std::array<int, 3>{3, 4, 5}));
}

TEST(Annotations, RoundTripAndErrors) {
  std::vector<AnnotationTriple> triples = {
      {"a", {Label{1}, Label{2}, Label{3}}},
      {"b", {Label{Exclusion::kMonolingual}, Label{5},
             Label{Exclusion::kOtherLanguage}}}};
  std::ostringstream out;
  write_annotations(out, triples);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_annotations(in, "r.csv"), triples);

  std::istringstream dup("sample_id,r1,r2,r3\na,1,2,3\na,1,2,3\n");
  EXPECT_THROW(parse_annotations(dup, "r.csv"), ValidationError);
  std::istringstream bad("sample_id,r1,r2,r3\na,1,6,3\n");
  try {
    parse_annotations(bad, "r.csv");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("r.csv:2"), std::string::npos);
  }
}

TEST(Corpus, JsonRoundTripPreservesEverything) {
  auto corpus = testing::synthetic_corpus(40, 3);
  corpus[0].perturbation = Perturbation::kDelete;
  corpus[1].labels = std::array<Label, 3>{Label{2}, Label{Exclusion::kAbusive},
                                          Label{5}};
  corpus[2].script = ScriptForm::kNormalised;
  corpus[3].tokens[0].pos.reset();
  std::ostringstream out;
  write_corpus(out, corpus);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_corpus(in, "rt").sentences, corpus);
}

TEST(Corpus, ValidationOfSentencesAndTokens) {
  EXPECT_THROW(validate_token(Token{"", A, {}}), ValidationError);
  EXPECT_THROW(validate_token(Token{"a b", A, {}}), ValidationError);
  TaggedSentence s = testing::make_sentence("", {A});
  EXPECT_THROW(validate_sentence(s), ValidationError);
  s.id = "ok";
  EXPECT_NO_THROW(validate_sentence(s));
  s.tokens.clear();
  EXPECT_THROW(validate_sentence(s), ValidationError);
}

TEST(Corpus, LoadMissingFileIsIoError) {
  EXPECT_THROW(load_corpus("/nonexistent/cmlab/corpus.jsonl"), IoError);
  EXPECT_THROW(load_annotations("/nonexistent/cmlab/r.csv"), IoError);
}

}  // namespace
}  // namespace cmlab
