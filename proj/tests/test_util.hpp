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

// Shared fixtures for the unit and acceptance tests.

#ifndef CMLAB_TESTS_TEST_UTIL_HPP_
#define CMLAB_TESTS_TEST_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmlab/corpus.hpp"
#include "cmlab/rng.hpp"

namespace cmlab::testing {

inline constexpr LanguageTag A = LanguageTag::kLangA;
inline constexpr LanguageTag B = LanguageTag::kLangB;
inline constexpr LanguageTag N = LanguageTag::kNeutral;

// Tokens w0, w1, ... with the given tags; PoS defaults to NOUN for language
// tokens and PUNCT for neutral ones.
inline TaggedSentence make_sentence(std::string id,
                                    const std::vector<LanguageTag>& lids,
                                    std::vector<std::optional<PosTag>> pos = {}) {
  TaggedSentence s;
  s.id = std::move(id);
  for (std::size_t i = 0; i < lids.size(); ++i) {
    Token t;
    t.surface = "w" + std::to_string(i);
    t.lid = lids[i];
    if (i < pos.size()) {
      t.pos = pos[i];
    } else {
      t.pos = lids[i] == N ? PosTag::PUNCT : PosTag::NOUN;
    }
    s.tokens.push_back(t);
  }
  s.text = join_surfaces(s.tokens);
  return s;
}

// Random tagged corpus: lengths 3..14, a small shared vocabulary so n-grams
// repeat, about one token in ten Neutral.
inline std::vector<TaggedSentence> synthetic_corpus(std::size_t n,
                                                    std::uint64_t seed) {
  static const char* const kWordsA[] = {"mera", "kal", "ghar", "bahut", "accha"};
  static const char* const kWordsB[] = {"phone", "office", "meeting", "late", "good"};
  static const PosTag kPos[] = {PosTag::NOUN, PosTag::VERB, PosTag::ADJ,
                                PosTag::PRON, PosTag::ADP};
  Rng rng(seed);
  std::vector<TaggedSentence> out;
  for (std::size_t i = 0; i < n; ++i) {
    TaggedSentence s;
    s.id = "s" + std::to_string(i);
    s.source = i % 2 == 0 ? Source::kSynthetic : Source::kSocial;
    const std::size_t len = 3 + uniform_index(rng, 12);
    for (std::size_t j = 0; j < len; ++j) {
      Token t;
      const std::size_t r = uniform_index(rng, 10);
      if (r == 0) {
        t.surface = ",";
        t.lid = N;
        t.pos = PosTag::PUNCT;
      } else {
        const std::size_t w = uniform_index(rng, 5);
        t.lid = r <= 5 ? A : B;
        t.surface = t.lid == A ? kWordsA[w] : kWordsB[w];
        t.pos = kPos[uniform_index(rng, 5)];
      }
      s.tokens.push_back(t);
    }
    s.text = join_surfaces(s.tokens);
    out.push_back(std::move(s));
  }
  return out;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("cmlab_" + tag + "_" + std::to_string(fnv1a64(tag) ^
                                                  reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace cmlab::testing

#endif  // CMLAB_TESTS_TEST_UTIL_HPP_
