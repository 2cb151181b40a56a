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

#ifndef CMLAB_TRANSLATOR_HPP_
#define CMLAB_TRANSLATOR_HPP_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cmlab/corpus.hpp"

namespace cmlab {

class TranslatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Injected translation capability used by back-translation. Implementations
// must be deterministic for a given input and safe to call concurrently.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string translate(std::string_view text, LanguageTag from,
                                LanguageTag to) const = 0;
};

class IdentityTranslator final : public Translator {
 public:
  std::string translate(std::string_view text, LanguageTag,
                        LanguageTag) const override {
    return std::string(text);
  }
};

// Word-by-word lookup in a bidirectional map. Words without an entry pass
// through unchanged. File format: one `l1_word<TAB>l2_word` pair per line.
class DictionaryTranslator final : public Translator {
 public:
  DictionaryTranslator() = default;
  void add(std::string l1_word, std::string l2_word);
  static DictionaryTranslator from_tsv(const std::filesystem::path& path);

  std::string translate(std::string_view text, LanguageTag from,
                        LanguageTag to) const override;

 private:
  std::map<std::string, std::string, std::less<>> l1_to_l2_;
  std::map<std::string, std::string, std::less<>> l2_to_l1_;
};

// JSON over HTTP: POST {"text","from","to"} to the configured URL and read
// the "text" field of the response. Only plain http:// URLs are supported.
class HttpTranslator final : public Translator {
 public:
  explicit HttpTranslator(std::string url);
  std::string translate(std::string_view text, LanguageTag from,
                        LanguageTag to) const override;

 private:
  std::string host_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace cmlab

#endif  // CMLAB_TRANSLATOR_HPP_
