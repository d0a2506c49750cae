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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tgpd/env/vocabulary.hpp"

namespace tgpd::env {

// Reward and episode-length constants shared by every game.
struct Rules {
  double completion_reward = 1.0;
  double step_penalty = -0.01;
  int episode_cap = 20;
};

inline constexpr std::string_view kMoveAction = "go";

struct Exit {
  std::string from;
  std::string direction;
  std::string to;
};

struct QuestSpec {
  std::string id;
  std::vector<std::string> texts;
  std::string room;
  std::string action;
  std::string object;
};

// Declarative description of one game plus the index tables derived from it
// at parse time. Build one with parse_game_spec(); the derived members are
// only consistent for specs produced that way.
struct GameSpec {
  std::string game_id;
  std::vector<std::string> rooms;
  std::vector<Exit> exits;
  std::map<std::string, std::string> objects;
  std::map<std::string, std::vector<std::string>> descriptions;
  std::vector<QuestSpec> quests;
  std::vector<std::string> actions;
  std::vector<std::string> object_words;
  Rules rules;

  // Derived.
  Vocabulary vocab;
  // room -> variant -> tokens
  std::vector<std::vector<TokenSeq>> description_tokens;
  // quest -> variant -> tokens
  std::vector<std::vector<TokenSeq>> quest_tokens;
  // room x object-word index -> destination room, or -1 when no exit
  std::vector<std::vector<int>> move_table;
  std::vector<std::size_t> quest_room;
  std::vector<std::size_t> quest_action;
  std::vector<std::size_t> quest_object;
  std::size_t move_action = static_cast<std::size_t>(-1);

  std::size_t room_index(std::string_view room) const;
  std::size_t action_index(std::string_view word) const;
  std::size_t object_index(std::string_view word) const;
  std::size_t num_actions() const noexcept { return actions.size(); }
  std::size_t num_objects() const noexcept { return object_words.size(); }
  std::size_t num_starts() const noexcept { return rooms.size() * quests.size(); }
};

// Parses and validates a game document (JSON). Errors are SpecError with the
// offending field path.
GameSpec parse_game_spec(std::string_view text);
GameSpec load_game_spec(const std::filesystem::path& path);

}  // namespace tgpd::env
