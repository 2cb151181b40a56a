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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cmlab/error.hpp"
#include "test_util.hpp"

namespace cmlab {
namespace {

using ::cmlab::testing::A;
using ::cmlab::testing::B;
using ::cmlab::testing::N;
using ::cmlab::testing::make_sentence;

// Straight-from-definition oracles. They share no code with the library.
double naive_cmi(const std::vector<LanguageTag>& lids) {
  int a = 0, b = 0, u = 0;
  for (auto t : lids) {
    if (t == A) ++a;
    else if (t == B) ++b;
    else ++u;
  }
  const int n = static_cast<int>(lids.size());
  if (n == u) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(std::max(a, b)) / (n - u));
}

int naive_switch_points(const std::vector<LanguageTag>& lids) {
  int count = 0;
  int prev = -1;
  for (auto t : lids) {
    if (t == N) continue;
    if (prev >= 0 && prev != static_cast<int>(t)) ++count;
    prev = static_cast<int>(t);
  }
  return count;
}

std::vector<int> naive_spans(const std::vector<LanguageTag>& lids) {
  std::vector<int> spans;
  int prev = -1;
  for (auto t : lids) {
    if (t == N) continue;
    if (static_cast<int>(t) == prev) {
      ++spans.back();
    } else {
      spans.push_back(1);
    }
    prev = static_cast<int>(t);
  }
  return spans;
}

std::optional<double> naive_burstiness(const std::vector<LanguageTag>& lids) {
  const auto spans = naive_spans(lids);
  if (spans.size() < 2) return std::nullopt;
  double mean = 0.0;
  for (int s : spans) mean += s;
  mean /= spans.size();
  double ss = 0.0;
  for (int s : spans) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (spans.size() - 1));
  return (sd - mean) / (sd + mean);
}

TEST(Cmi, WorkedExamples) {
  EXPECT_NEAR(cmi(std::vector{A, B, A, B, A, A}), 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(cmi(std::vector{B, B, A, B, B}), 20.0, 1e-12);
  EXPECT_NEAR(cmi(std::vector{A, B, B, B, A}), 40.0, 1e-12);
  EXPECT_EQ(cmi(std::vector{N, N}), 0.0);
  EXPECT_EQ(cmi(std::vector{A, A, N}), 0.0);
  EXPECT_NEAR(cmi(std::vector{A, N, B}), 50.0, 1e-12);
}

TEST(SwitchPoints, WorkedExamples) {
  EXPECT_EQ(switch_points(std::vector{A, B, A, B, A, A}), 4);
  EXPECT_EQ(switch_points(std::vector{B, B, A, B, B}), 2);
  EXPECT_EQ(switch_points(std::vector{A, B, B, B, A}), 2);
  EXPECT_EQ(switch_points(std::vector{A, N, A}), 0);
  EXPECT_EQ(switch_points(std::vector{A, N, B}), 1);
}

TEST(Spans, NeutralTokensAreTransparent) {
  EXPECT_EQ(language_spans(std::vector{A, B, A, B, A, A}),
            (std::vector<int>{1, 1, 1, 1, 2}));
  EXPECT_EQ(language_spans(std::vector{A, N, A, B}), (std::vector<int>{2, 1}));
  EXPECT_TRUE(language_spans(std::vector{N, N}).empty());
}

TEST(Burstiness, PeriodicSpansGiveMinusOne) {
  EXPECT_DOUBLE_EQ(*burstiness_of_spans(std::vector<int>{2, 2, 2}), -1.0);
  EXPECT_FALSE(burstiness_of_spans(std::vector<int>{5}).has_value());
  EXPECT_FALSE(burstiness(std::vector{A, A, N}).has_value());
}

TEST(Burstiness, SampleStandardDeviation) {
  // Spans 1,1,1,1,2: mean 1.2, sample sd sqrt(0.2).
  const double sd = std::sqrt(0.2);
  EXPECT_NEAR(*burstiness(std::vector{A, B, A, B, A, A}),
              (sd - 1.2) / (sd + 1.2), 1e-12);
}

TEST(Metrics, AgreeWithOraclesOnAllShortSequences) {
  for (int len = 0; len <= 8; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::vector<LanguageTag> lids;
      int c = code;
      for (int i = 0; i < len; ++i, c /= 3) {
        lids.push_back(static_cast<LanguageTag>(c % 3));
      }
      ASSERT_EQ(cmi(lids), naive_cmi(lids));
      ASSERT_EQ(switch_points(lids), naive_switch_points(lids));
      ASSERT_EQ(language_spans(lids), naive_spans(lids));
      ASSERT_EQ(burstiness(lids), naive_burstiness(lids));
    }
  }
}

TEST(Metrics, BoundsHold) {
  for (const auto& s : testing::synthetic_corpus(300, 11)) {
    const auto lids = lid_sequence(s);
    const double c = cmi(lids);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 50.0);  // two languages: the dominant share is >= 1/2
    const int sp = switch_points(lids);
    EXPECT_EQ(static_cast<std::size_t>(sp) + 1,
              std::max<std::size_t>(1, language_spans(lids).size()));
    if (auto b = burstiness(lids)) {
      EXPECT_GE(*b, -1.0);
      EXPECT_LT(*b, 1.0);
    }
  }
}

TEST(Symcom, SignedWithLangAPositive) {
  const auto s = make_sentence(
      "s", {A, B, B, A, N},
      {PosTag::VERB, PosTag::NOUN, PosTag::NOUN, PosTag::NOUN, PosTag::PUNCT});
  EXPECT_DOUBLE_EQ(*symcom_pos(s, PosTag::VERB), 1.0);
  EXPECT_NEAR(*symcom_pos(s, PosTag::NOUN), -1.0 / 3.0, 1e-12);
  EXPECT_FALSE(symcom_pos(s, PosTag::ADJ).has_value());
  EXPECT_FALSE(symcom_pos(s, PosTag::PUNCT).has_value());  // neutral only
  // Weighted |SyMCoM|: (1 * 1 + 3 * 1/3) / 4.
  EXPECT_NEAR(*symcom_sentence(s), 0.5, 1e-12);
}

TEST(Symcom, BalancedCategoryIsZero) {
  const auto s = make_sentence("s", {A, B}, {PosTag::ADJ, PosTag::ADJ});
  EXPECT_EQ(*symcom_pos(s, PosTag::ADJ), 0.0);
  EXPECT_EQ(*symcom_sentence(s), 0.0);
  EXPECT_FALSE(symcom_from_counts(0, 0).has_value());
  EXPECT_FALSE(symcom_sentence(make_sentence("n", {N})).has_value());
}

TEST(Symcom, AntisymmetricUnderLanguageSwap) {
  for (auto s : testing::synthetic_corpus(100, 5)) {
    auto swapped = s;
    for (auto& t : swapped.tokens) {
      if (t.lid == A) t.lid = B;
      else if (t.lid == B) t.lid = A;
    }
    for (PosTag p : kAllPosTags) {
      const auto x = symcom_pos(s, p);
      const auto y = symcom_pos(swapped, p);
      ASSERT_EQ(x.has_value(), y.has_value());
      if (x) EXPECT_DOUBLE_EQ(*x, -*y);
    }
    EXPECT_EQ(symcom_sentence(s), symcom_sentence(swapped));
  }
}

TEST(Symcom, InvariantUnderTokenPermutation) {
  Rng rng(99);
  for (auto s : testing::synthetic_corpus(100, 6)) {
    auto shuffled = s;
    shuffle(std::span<Token>(shuffled.tokens), rng);
    for (PosTag p : kAllPosTags) {
      EXPECT_EQ(symcom_pos(s, p), symcom_pos(shuffled, p));
    }
    EXPECT_NEAR(symcom_sentence(s).value_or(-9),
                symcom_sentence(shuffled).value_or(-9), 1e-12);
  }
}

TEST(Symcom, MissingPosOnLanguageTokenThrows) {
  auto s = make_sentence("s", {A, B});
  s.tokens[1].pos.reset();
  EXPECT_FALSE(has_pos_tags(s));
  EXPECT_THROW(count_pos_by_language(s), ValidationError);
  const MetricRow row = metric_row(s);
  EXPECT_FALSE(row.symcom_sentence.has_value());
  EXPECT_NEAR(row.cmi, 50.0, 1e-12);
}

TEST(Fertility, CountsPiecesPerWord) {
  const std::vector<TaggedSentence> corpus = {make_sentence("a", {A, B, B})};
  EXPECT_DOUBLE_EQ(fertility(corpus, [](std::string_view) { return 1u; }), 1.0);
  EXPECT_DOUBLE_EQ(fertility(corpus, [](std::string_view w) { return w.size(); }),
                   2.0);
  EXPECT_THROW(fertility(std::vector<TaggedSentence>{},
                         [](std::string_view) { return 1u; }),
               ValidationError);
  try {
    fertility(corpus, [](std::string_view w) -> std::size_t {
      if (w == "w1") throw std::runtime_error("boom");
      return 1;
    });
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'w1'"), std::string::npos);
  }
}

TEST(WordPiece, GreedyLongestMatch) {
  const WordPieceSegmenter wp({"un", "##aff", "##able", "aff", "##a", "##ble"});
  EXPECT_EQ(wp.segment("unaffable"),
            (std::vector<std::string>{"un", "##aff", "##able"}));
  EXPECT_EQ(wp.segment("affable"),
            (std::vector<std::string>{"aff", "##able"}));
  EXPECT_EQ(wp.segment("xyz"), (std::vector<std::string>{"[UNK]"}));
  EXPECT_EQ(wp("unable"), 2u);
}

TEST(MetricRows, ParallelMatchesSerial) {
  const auto corpus = testing::synthetic_corpus(500, 21);
  ExternalScores ext;
  ext["s3"] = 0.25;
  EXPECT_EQ(metric_rows(corpus, &ext), metric_rows_serial(corpus, &ext));
  EXPECT_EQ(metric_rows(corpus, &ext)[3].external_score, 0.25);
  EXPECT_FALSE(metric_rows(corpus, &ext)[4].external_score.has_value());
}

TEST(MetricRows, UnknownExternalIdIsRejected) {
  const auto corpus = testing::synthetic_corpus(5, 1);
  ExternalScores ext;
  ext["nope"] = 1.0;
  EXPECT_THROW(metric_rows(corpus, &ext), ValidationError);
  EXPECT_THROW(metric_rows_serial(corpus, &ext), ValidationError);
}

TEST(MetricRows, CsvRoundTrip) {
  const auto rows = metric_rows(testing::synthetic_corpus(50, 8), nullptr);
  std::ostringstream first;
  write_metric_rows(first, rows);
  std::istringstream in(first.str());
  const auto back = read_metric_rows(in, "m.csv");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].sample_id, rows[i].sample_id);
    EXPECT_EQ(back[i].switch_points, rows[i].switch_points);
    EXPECT_NEAR(back[i].cmi, rows[i].cmi, 0.005 + 1e-12);
  }
  std::ostringstream second;
  write_metric_rows(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(metric_csv_header().size(), 7 + kPosTagCount);
}

TEST(ExternalScores, ParsesIdScoreCsv) {
  std::istringstream in("id,score\na,0.5\nb,-1\n");
  const auto ext = read_external_scores(in, "e.csv");
  EXPECT_EQ(ext.at("a"), 0.5);
  EXPECT_EQ(ext.at("b"), -1.0);
  std::istringstream bad("id,score\na,xx\n");
  EXPECT_THROW(read_external_scores(bad, "e.csv"), ValidationError);
}

}  // namespace
}  // namespace cmlab
