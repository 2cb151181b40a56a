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

#include "cmlab/translator.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "cmlab/error.hpp"

namespace cmlab {

void DictionaryTranslator::add(std::string l1_word, std::string l2_word) {
  l1_to_l2_.insert_or_assign(l1_word, l2_word);
  l2_to_l1_.insert_or_assign(std::move(l2_word), std::move(l1_word));
}

DictionaryTranslator DictionaryTranslator::from_tsv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  DictionaryTranslator dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected two tab-separated words");
    }
    dict.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return dict;
}

std::string DictionaryTranslator::translate(std::string_view text,
                                            LanguageTag from,
                                            LanguageTag to) const {
  const std::map<std::string, std::string, std::less<>>* table = nullptr;
  if (from == LanguageTag::kLangA && to == LanguageTag::kLangB) {
    table = &l1_to_l2_;
  } else if (from == LanguageTag::kLangB && to == LanguageTag::kLangA) {
    table = &l2_to_l1_;
  }
  std::istringstream words{std::string(text)};
  std::string word;
  std::string out;
  while (words >> word) {
    if (!out.empty()) out.push_back(' ');
    if (table) {
      if (auto it = table->find(word); it != table->end()) {
        out += it->second;
        continue;
      }
    }
    out += word;
  }
  return out;
}

HttpTranslator::HttpTranslator(std::string url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) {
    throw ValidationError("translator URL must start with http://: " + url);
  }
  const auto slash = url.find('/', kScheme.size());
  if (slash == std::string::npos) {
    host_ = url;
    path_ = "/";
  } else {
    host_ = url.substr(0, slash);
    path_ = url.substr(slash);
  }
  if (host_.size() == kScheme.size()) {
    throw ValidationError("translator URL has no host: " + url);
  }
}

std::string HttpTranslator::translate(std::string_view text, LanguageTag from,
                                      LanguageTag to) const {
  nlohmann::json request = {{"text", std::string(text)},
                            {"from", std::string(to_string(from))},
                            {"to", std::string(to_string(to))}};
  httplib::Client client(host_);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  auto res = client.Post(path_, request.dump(), "application/json");
  if (!res) {
    throw TranslatorError("request to " + host_ + path_ + " failed: " +
                          httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TranslatorError("translator returned HTTP " +
                          std::to_string(res->status));
  }
  try {
    const auto body = nlohmann::json::parse(res->body);
    return body.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TranslatorError(std::string("malformed translator response: ") +
                          e.what());
  }
}

}  // namespace cmlab
