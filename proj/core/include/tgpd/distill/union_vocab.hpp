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

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "tgpd/env/game_spec.hpp"

namespace tgpd::distill {

using env::TokenId;

// Shared word index over several games, with a per-game remapping table.
// For two or more games the words are the sorted union; a single game keeps
// its own vocabulary order so a one-game union is that game's vocabulary.
class UnionVocab {
 public:
  UnionVocab() = default;

  static UnionVocab build(std::span<const env::GameSpec* const> specs);

  // Rebinds games onto an existing word list (e.g. a checkpoint's). Throws
  // ArchitectureError when a game word is missing.
  static UnionVocab from_words(const std::vector<std::string>& words,
                               std::span<const env::GameSpec* const> specs);

  const env::Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  const std::vector<std::string>& game_ids() const noexcept { return game_ids_; }
  bool has_game(const std::string& game_id) const { return maps_.count(game_id) != 0; }

  // Game token id -> union id.
  const std::vector<TokenId>& token_map(const std::string& game_id) const;

  // 1 for every union word that occurs in the game's vocabulary.
  std::vector<char> membership(const std::string& game_id) const;

 private:
  void bind(const env::GameSpec& spec);

  env::Vocabulary vocab_;
  std::vector<std::string> game_ids_;
  std::map<std::string, std::vector<TokenId>> maps_;
};

}  // namespace tgpd::distill
