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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tgpd/common/random.hpp"
#include "tgpd/env/game_spec.hpp"

namespace tgpd::env {

struct Command {
  std::string action;
  std::string object;
  friend bool operator==(const Command&, const Command&) = default;
};

// Position of a command in the action and object word lists.
struct CommandIndex {
  std::size_t action = 0;
  std::size_t object = 0;
  friend bool operator==(const CommandIndex&, const CommandIndex&) = default;
};

struct EnvState {
  std::size_t room = 0;
  std::size_t quest = 0;
  std::size_t quest_variant = 0;
  int steps_taken = 0;
  bool done = false;
  Rng rng;
};

struct Observation {
  std::string text;
  TokenSeq tokens;
  std::string game_id;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool quest_completed = false;
};

// Uniform random room, quest and text variants; deterministic in `seed`.
std::pair<EnvState, Observation> reset(const GameSpec& spec, std::uint64_t seed);

// Starts in a fixed (room, quest); text variants still come from `seed`.
std::pair<EnvState, Observation> reset_to(const GameSpec& spec, std::size_t room,
                                          std::size_t quest, std::uint64_t seed);

StepResult step(EnvState& state, const GameSpec& spec, const CommandIndex& cmd);
StepResult step(EnvState& state, const GameSpec& spec, const Command& cmd);

// Cross product actions x objects, action-major.
std::vector<Command> command_space(const GameSpec& spec);

CommandIndex to_index(const GameSpec& spec, const Command& cmd);
Command to_command(const GameSpec& spec, const CommandIndex& cmd);

// Shortest number of moves between every pair of rooms; -1 if unreachable.
std::vector<std::vector<int>> room_distances(const GameSpec& spec);

// First command of a shortest completion from the current room.
CommandIndex optimal_command(const GameSpec& spec, std::size_t room, std::size_t quest);

// Mean over all (room, quest) starts of the best achievable episode return.
double optimal_average_return(const GameSpec& spec);

}  // namespace tgpd::env
