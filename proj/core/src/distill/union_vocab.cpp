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

#include "tgpd/distill/union_vocab.hpp"

#include <algorithm>
#include <set>

#include "tgpd/common/error.hpp"

namespace tgpd::distill {

UnionVocab UnionVocab::build(std::span<const env::GameSpec* const> specs) {
  if (specs.empty()) throw ConfigError("union vocabulary needs at least one game");
  UnionVocab u;
  if (specs.size() == 1) {
    u.vocab_ = specs[0]->vocab;
  } else {
    std::set<std::string> words;
    for (const auto* s : specs) words.insert(s->vocab.words().begin(), s->vocab.words().end());
    u.vocab_ = env::Vocabulary(std::vector<std::string>(words.begin(), words.end()));
  }
  for (const auto* s : specs) u.bind(*s);
  return u;
}

UnionVocab UnionVocab::from_words(const std::vector<std::string>& words,
                                  std::span<const env::GameSpec* const> specs) {
  UnionVocab u;
  u.vocab_ = env::Vocabulary(words);
  for (const auto* s : specs) u.bind(*s);
  return u;
}

void UnionVocab::bind(const env::GameSpec& spec) {
  if (maps_.count(spec.game_id)) throw ConfigError("game '" + spec.game_id + "' registered twice");
  std::vector<TokenId> map;
  map.reserve(spec.vocab.size());
  for (const auto& w : spec.vocab.words()) {
    auto id = vocab_.find(w);
    if (!id) {
      throw ArchitectureError("word '" + w + "' of game '" + spec.game_id +
                              "' is not in the shared vocabulary");
    }
    map.push_back(*id);
  }
  game_ids_.push_back(spec.game_id);
  maps_.emplace(spec.game_id, std::move(map));
}

const std::vector<TokenId>& UnionVocab::token_map(const std::string& game_id) const {
  auto it = maps_.find(game_id);
  if (it == maps_.end()) throw ArchitectureError("game '" + game_id + "' is not registered");
  return it->second;
}

std::vector<char> UnionVocab::membership(const std::string& game_id) const {
  std::vector<char> mask(vocab_.size(), 0);
  for (TokenId id : token_map(game_id)) mask[id] = 1;
  return mask;
}

}  // namespace tgpd::distill
