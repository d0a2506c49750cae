// Copyright 2026 The tgpd Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tgpd/env/vocabulary.hpp"

#include <cctype>

#include "tgpd/common/error.hpp"

namespace tgpd::env {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (std::isspace(ch)) {
      flush();
    } else if (!std::ispunct(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  for (const auto& w : words) add(w);
}

TokenId Vocabulary::add(const std::string& word) {
  auto [it, inserted] = index_.try_emplace(word, static_cast<TokenId>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenSeq Vocabulary::encode(std::string_view text) const {
  TokenSeq ids;
  for (const auto& w : tokenize(text)) {
    auto id = find(w);
    if (!id) throw SpecError("text", "word '" + w + "' is not in the vocabulary");
    ids.push_back(*id);
  }
  return ids;
}

}  // namespace tgpd::env
