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

#include "cmlab/curation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cmlab/error.hpp"
#include "cmlab/rng.hpp"

namespace cmlab {
namespace {

constexpr char kGramSep = '\x1f';

TaggedSentence perturbed_copy(const TaggedSentence& s, Perturbation kind) {
  TaggedSentence out = s;
  out.perturbation = kind;
  // Ratings belong to the original sentence.
  out.labels.reset();
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(std::move(w));
  return words;
}

LanguageTag other_language(LanguageTag t) {
  return t == LanguageTag::kLangA ? LanguageTag::kLangB : LanguageTag::kLangA;
}

bool is_mixed(std::span<const Token> window) {
  bool a = false;
  bool b = false;
  for (const Token& t : window) {
    a = a || t.lid == LanguageTag::kLangA;
    b = b || t.lid == LanguageTag::kLangB;
  }
  return a && b;
}

void count_sentence(const TaggedSentence& s, int n,
                    std::unordered_map<std::string, std::size_t>& counts) {
  const auto len = s.tokens.size();
  const auto width = static_cast<std::size_t>(n);
  if (len < width) return;
  std::span<const Token> tokens(s.tokens);
  for (std::size_t i = 0; i + width <= len; ++i) {
    auto window = tokens.subspan(i, width);
    if (!is_mixed(window)) continue;
    std::string key;
    for (std::size_t k = 0; k < width; ++k) {
      if (k) key.push_back(kGramSep);
      key += window[k].surface;
    }
    ++counts[key];
  }
}

std::vector<NgramCount> finish_counts(
    const std::unordered_map<std::string, std::size_t>& counts) {
  std::vector<NgramCount> out;
  out.reserve(counts.size());
  for (const auto& [key, freq] : counts) {
    NgramCount c;
    c.frequency = freq;
    std::size_t start = 0;
    while (true) {
      const auto sep = key.find(kGramSep, start);
      c.gram.push_back(key.substr(start, sep - start));
      if (sep == std::string::npos) break;
      start = sep + 1;
    }
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const NgramCount& a, const NgramCount& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.gram < b.gram;
  });
  return out;
}

void check_ngram_order(int n) {
  if (n < 2 || n > 4) {
    throw ValidationError("n-gram order must be 2, 3 or 4 (got " +
                          std::to_string(n) + ")");
  }
}

// Why a sentence cannot take this perturbation, or empty if it can.
std::string ineligibility(const TaggedSentence& s, const PerturbSpec& spec) {
  const auto len = s.tokens.size();
  if (std::holds_alternative<SwapKind>(spec.kind)) {
    if (len < 2) return "fewer than 2 tokens";
  } else if (const auto* d = std::get_if<DeleteKind>(&spec.kind)) {
    const int count = delete_count(*d, len);
    if (count >= static_cast<int>(len)) {
      return "delete count " + std::to_string(count) + " >= length " +
             std::to_string(len);
    }
  } else {
    const bool any_language = std::any_of(
        s.tokens.begin(), s.tokens.end(),
        [](const Token& t) { return t.lid != LanguageTag::kNeutral; });
    if (!any_language) return "no language-bearing token";
  }
  return {};
}

TaggedSentence apply_spec(const TaggedSentence& s, const PerturbSpec& spec,
                          const Translator* translator) {
  if (const auto* sw = std::get_if<SwapKind>(&spec.kind)) {
    return perturb_swap(s, sw->pairs, spec.seed);
  }
  if (const auto* d = std::get_if<DeleteKind>(&spec.kind)) {
    return perturb_delete(s, delete_count(*d, s.tokens.size()), spec.seed);
  }
  if (!translator) {
    throw ValidationError("back-translation requires a translator");
  }
  return perturb_backtranslate(s, *translator);
}

}  // namespace

TaggedSentence perturb_swap(const TaggedSentence& sentence, int pairs,
                            std::uint64_t seed) {
  const auto len = sentence.tokens.size();
  if (len < 2) {
    throw ValidationError("sentence '" + sentence.id +
                          "' is too short to swap tokens");
  }
  if (pairs < 1) throw ValidationError("swap pairs must be >= 1");
  TaggedSentence out = perturbed_copy(sentence, Perturbation::kSwap);
  Rng rng(derive_seed(seed, sentence.id));
  for (int p = 0; p < pairs; ++p) {
    const std::size_t i = uniform_index(rng, len);
    std::size_t j = uniform_index(rng, len - 1);
    if (j >= i) ++j;
    std::swap(out.tokens[i], out.tokens[j]);
  }
  out.text = join_surfaces(out.tokens);
  return out;
}

TaggedSentence perturb_delete(const TaggedSentence& sentence, int count,
                              std::uint64_t seed) {
  const auto len = static_cast<int>(sentence.tokens.size());
  if (count < 1 || count >= len) {
    throw ValidationError("delete count " + std::to_string(count) +
                          " out of range for sentence '" + sentence.id +
                          "' of length " + std::to_string(len));
  }
  Rng rng(derive_seed(seed, sentence.id));
  std::vector<std::size_t> order(sentence.tokens.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` entries are the victims.
  for (int k = 0; k < count; ++k) {
    const std::size_t j = k + uniform_index(rng, order.size() - k);
    std::swap(order[k], order[j]);
  }
  std::vector<bool> drop(sentence.tokens.size(), false);
  for (int k = 0; k < count; ++k) drop[order[k]] = true;

  TaggedSentence out = perturbed_copy(sentence, Perturbation::kDelete);
  out.tokens.clear();
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (!drop[i]) out.tokens.push_back(sentence.tokens[i]);
  }
  out.text = join_surfaces(out.tokens);
  return out;
}

MonoSpan longest_mono_span(const TaggedSentence& sentence) {
  std::optional<MonoSpan> best;
  std::optional<MonoSpan> run;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const LanguageTag lid = sentence.tokens[i].lid;
    if (lid == LanguageTag::kNeutral) {
      run.reset();
      continue;
    }
    if (run && run->language == lid) {
      run->end = i;
    } else {
      run = MonoSpan{i, i, lid};
    }
    if (!best || run->length() > best->length()) best = run;
  }
  if (!best) {
    throw ValidationError("sentence '" + sentence.id +
                          "' has no language-bearing token");
  }
  return *best;
}

TaggedSentence perturb_backtranslate(const TaggedSentence& sentence,
                                     const Translator& translator) {
  const MonoSpan span = longest_mono_span(sentence);
  const std::string span_text = join_surfaces(
      std::span<const Token>(sentence.tokens).subspan(span.start, span.length()));
  const LanguageTag pivot = other_language(span.language);

  std::string round_trip;
  try {
    const std::string there = translator.translate(span_text, span.language, pivot);
    round_trip = translator.translate(there, pivot, span.language);
  } catch (const std::exception& e) {
    throw TranslatorError("back-translation of span '" + span_text +
                          "' failed: " + e.what());
  }
  const auto words = split_whitespace(round_trip);
  if (words.empty()) {
    throw TranslatorError("back-translation of span '" + span_text +
                          "' returned no text");
  }

  TaggedSentence out = perturbed_copy(sentence, Perturbation::kBackTranslate);
  out.tokens.assign(sentence.tokens.begin(),
                    sentence.tokens.begin() + static_cast<std::ptrdiff_t>(span.start));
  for (const auto& w : words) {
    Token t;
    t.surface = w;
    t.lid = script_lid(w);
    // Romanised Hindi is Latin script, so script detection cannot separate
    // the languages there; the round trip returns to the span's language.
    if (sentence.script == ScriptForm::kRomanised && t.lid != LanguageTag::kNeutral) {
      t.lid = span.language;
    }
    out.tokens.push_back(std::move(t));
  }
  out.tokens.insert(out.tokens.end(),
                    sentence.tokens.begin() + static_cast<std::ptrdiff_t>(span.end + 1),
                    sentence.tokens.end());
  out.text = join_surfaces(out.tokens);
  return out;
}

int delete_count(const DeleteKind& kind, std::size_t length) {
  if (kind.count) return *kind.count;
  const double raw = kind.fraction * static_cast<double>(length);
  return std::max(1, static_cast<int>(std::floor(raw + 0.5)));
}

PerturbResult perturb_corpus_serial(std::span<const TaggedSentence> corpus,
                                    const PerturbSpec& spec,
                                    const Translator* translator) {
  PerturbResult result;
  for (const TaggedSentence& s : corpus) {
    if (auto why = ineligibility(s, spec); !why.empty()) {
      result.skipped.push_back(s.id + ": " + why);
      continue;
    }
    result.sentences.push_back(apply_spec(s, spec, translator));
  }
  return result;
}

PerturbResult perturb_corpus(std::span<const TaggedSentence> corpus,
                             const PerturbSpec& spec,
                             const Translator* translator) {
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  std::vector<std::optional<TaggedSentence>> out(corpus.size());
  std::vector<std::string> why(corpus.size());
  std::vector<std::exception_ptr> failures(corpus.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      why[i] = ineligibility(corpus[i], spec);
      if (why[i].empty()) out[i] = apply_spec(corpus[i], spec, translator);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  PerturbResult result;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (out[i]) {
      result.sentences.push_back(std::move(*out[i]));
    } else {
      result.skipped.push_back(corpus[i].id + ": " + why[i]);
    }
  }
  return result;
}

std::vector<NgramCount> extract_mixed_ngrams_serial(
    std::span<const TaggedSentence> corpus, int n) {
  check_ngram_order(n);
  std::unordered_map<std::string, std::size_t> counts;
  for (const TaggedSentence& s : corpus) count_sentence(s, n, counts);
  return finish_counts(counts);
}

std::vector<NgramCount> extract_mixed_ngrams(
    std::span<const TaggedSentence> corpus, int n) {
  check_ngram_order(n);
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::vector<std::unordered_map<std::string, std::size_t>> local(
      static_cast<std::size_t>(threads));
  const auto size = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel num_threads(threads)
  {
#ifdef _OPENMP
    auto& counts = local[static_cast<std::size_t>(omp_get_thread_num())];
#else
    auto& counts = local[0];
#endif
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      count_sentence(corpus[i], n, counts);
    }
  }
  auto& merged = local.front();
  for (std::size_t t = 1; t < local.size(); ++t) {
    for (const auto& [key, freq] : local[t]) merged[key] += freq;
  }
  return finish_counts(merged);
}

std::vector<std::string> prune_by_disagreement(
    std::span<const std::pair<std::string, RatingSummary>> records,
    int threshold) {
  std::vector<std::string> kept;
  for (const auto& [id, summary] : records) {
    if (summary.disagreement <= threshold) kept.push_back(id);
  }
  return kept;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

std::size_t rating_bin(double average, std::span<const double> edges) {
  if (edges.size() < 2) return 0;
  const std::size_t bins = edges.size() - 1;
  for (std::size_t k = 0; k + 1 < bins; ++k) {
    if (average < edges[k + 1]) return k;
  }
  return bins - 1;
}

SplitResult stratified_split(
    std::span<const std::pair<std::string, RatingSummary>> records,
    const SplitOptions& options) {
  const auto& r = options.ratios;
  if (r[0] < 0 || r[1] < 0 || r[2] < 0 ||
      std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw ValidationError("split ratios must be non-negative and sum to 1");
  }
  if (options.bin_edges.size() < 2 ||
      !std::is_sorted(options.bin_edges.begin(), options.bin_edges.end())) {
    throw ValidationError("rating bin edges must be >= 2 ascending values");
  }

  const std::size_t bins = options.bin_edges.size() - 1;
  std::vector<std::vector<std::pair<std::uint64_t, std::string>>> members(bins);
  for (const auto& [id, summary] : records) {
    members[rating_bin(summary.average, options.bin_edges)].emplace_back(
        derive_seed(options.seed, id), id);
  }

  SplitResult result;
  // Walk the bins in order, each bin in seeded-hash order, and give every
  // sample to the split furthest behind its target share of the prefix seen
  // so far. Prefix counts then track the ratios to within one sample, so
  // each bin (a contiguous block of the walk) tracks them too.
  std::array<std::size_t, 3> assigned{};
  std::size_t seen = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    auto& bin = members[b];
    std::sort(bin.begin(), bin.end());
    if (!bin.empty() && bin.size() < 3) {
      std::ostringstream msg;
      msg << "rating bin [" << options.bin_edges[b] << ", "
          << options.bin_edges[b + 1] << "] has only " << bin.size()
          << " sample(s); it cannot appear in every split";
      result.warnings.push_back(msg.str());
    }
    for (const auto& member : bin) {
      ++seen;
      std::size_t pick = 0;
      double best_deficit = -1e300;
      for (std::size_t s = 0; s < 3; ++s) {
        if (r[s] <= 0.0) continue;
        const double deficit =
            r[s] * static_cast<double>(seen) - static_cast<double>(assigned[s]);
        if (deficit > best_deficit + 1e-12) {
          best_deficit = deficit;
          pick = s;
        }
      }
      ++assigned[pick];
      if (!result.assignment.emplace(member.second, static_cast<Split>(pick))
               .second) {
        throw ValidationError("duplicate id '" + member.second +
                              "' in split input");
      }
    }
  }
  return result;
}

}  // namespace cmlab
