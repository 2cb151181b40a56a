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

// Corpus curation: negative-sample perturbations, code-mixed n-gram
// extraction, disagreement pruning and stratified splitting.
//
// Every random choice for a sample is drawn from a stream seeded with
// derive_seed(seed, sample id), so results do not depend on corpus order or
// on how the corpus is partitioned across threads.

#ifndef CMLAB_CURATION_HPP_
#define CMLAB_CURATION_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cmlab/corpus.hpp"
#include "cmlab/translator.hpp"

namespace cmlab {

// Swaps `pairs` random position pairs. Requires at least two tokens.
TaggedSentence perturb_swap(const TaggedSentence& sentence, int pairs,
                            std::uint64_t seed);

// Removes `count` random tokens, 1 <= count < length.
TaggedSentence perturb_delete(const TaggedSentence& sentence, int count,
                              std::uint64_t seed);

struct MonoSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  LanguageTag language = LanguageTag::kNeutral;

  std::size_t length() const { return end - start + 1; }
  bool operator==(const MonoSpan&) const = default;
};

// Longest contiguous run of tokens sharing one language tag. Neutral tokens
// break runs. Ties go to the earliest start.
MonoSpan longest_mono_span(const TaggedSentence& sentence);

// Round-trips the longest single-language span through the other language
// and splices the result back. New tokens lose their PoS tags.
TaggedSentence perturb_backtranslate(const TaggedSentence& sentence,
                                     const Translator& translator);

struct SwapKind {
  int pairs = 1;
};
// Either an absolute count or a fraction of the sentence length (rounded
// half up, at least one token).
struct DeleteKind {
  std::optional<int> count;
  double fraction = 0.1;
};
struct BackTranslateKind {};

struct PerturbSpec {
  std::variant<SwapKind, DeleteKind, BackTranslateKind> kind;
  std::uint64_t seed = 0;
};

// Delete count for a sentence of `length` tokens under `kind`.
int delete_count(const DeleteKind& kind, std::size_t length);

struct PerturbResult {
  std::vector<TaggedSentence> sentences;
  std::vector<std::string> skipped;  // one message per ineligible sample
};

// Applies `spec` to every eligible sentence. Parallel over samples; the
// serial variant is the reference implementation.
PerturbResult perturb_corpus(std::span<const TaggedSentence> corpus,
                             const PerturbSpec& spec,
                             const Translator* translator);
PerturbResult perturb_corpus_serial(std::span<const TaggedSentence> corpus,
                                    const PerturbSpec& spec,
                                    const Translator* translator);

struct NgramCount {
  std::vector<std::string> gram;
  std::size_t frequency = 0;

  bool operator==(const NgramCount&) const = default;
};

// n-grams (n in 2..4) with at least one LangA and one LangB token, sorted by
// descending frequency, then lexicographically by surfaces.
std::vector<NgramCount> extract_mixed_ngrams(
    std::span<const TaggedSentence> corpus, int n);
std::vector<NgramCount> extract_mixed_ngrams_serial(
    std::span<const TaggedSentence> corpus, int n);

// Ids whose disagreement is at most `threshold`, in input order.
std::vector<std::string> prune_by_disagreement(
    std::span<const std::pair<std::string, RatingSummary>> records,
    int threshold = 4);

enum class Split : std::uint8_t { kTrain, kDev, kTest };
std::string_view to_string(Split s);

using SplitAssignment = std::map<std::string, Split>;

struct SplitOptions {
  std::array<double, 3> ratios = {0.7, 0.1, 0.2};
  // Rating-bin edges; bin k is [edges[k], edges[k+1]), the last bin closed.
  std::vector<double> bin_edges = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::uint64_t seed = 0;
};

struct SplitResult {
  SplitAssignment assignment;
  std::vector<std::string> warnings;
};

// Stratifies on the average rating. Within each bin ids are ordered by their
// seeded hash and dealt to whichever split lags its share the most. Global
// split sizes land within one sample of their exact share, and each bin
// within two.
SplitResult stratified_split(
    std::span<const std::pair<std::string, RatingSummary>> records,
    const SplitOptions& options);

std::size_t rating_bin(double average, std::span<const double> edges);

}  // namespace cmlab

#endif  // CMLAB_CURATION_HPP_
