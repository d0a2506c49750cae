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

#include "tgpd/env/environment.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "tgpd/common/error.hpp"

namespace tgpd::env {
namespace {

Observation observe(const GameSpec& spec, EnvState& state) {
  const auto& variants = spec.description_tokens[state.room];
  const std::size_t dv = uniform_index(state.rng, variants.size());
  const auto& room_text = spec.descriptions.at(spec.rooms[state.room])[dv];
  const auto& quest_text = spec.quests[state.quest].texts[state.quest_variant];

  Observation obs;
  obs.game_id = spec.game_id;
  obs.text = room_text + " " + quest_text;
  obs.tokens = variants[dv];
  const auto& qt = spec.quest_tokens[state.quest][state.quest_variant];
  obs.tokens.insert(obs.tokens.end(), qt.begin(), qt.end());
  return obs;
}

}  // namespace

std::pair<EnvState, Observation> reset_to(const GameSpec& spec, std::size_t room,
                                          std::size_t quest, std::uint64_t seed) {
  if (room >= spec.rooms.size() || quest >= spec.quests.size()) {
    throw SpecError("reset", "start (room, quest) out of range");
  }
  EnvState state;
  state.rng.seed(seed);
  state.room = room;
  state.quest = quest;
  state.quest_variant = uniform_index(state.rng, spec.quests[quest].texts.size());
  Observation obs = observe(spec, state);
  return {std::move(state), std::move(obs)};
}

std::pair<EnvState, Observation> reset(const GameSpec& spec, std::uint64_t seed) {
  EnvState state;
  state.rng.seed(seed);
  state.room = uniform_index(state.rng, spec.rooms.size());
  state.quest = uniform_index(state.rng, spec.quests.size());
  state.quest_variant = uniform_index(state.rng, spec.quests[state.quest].texts.size());
  Observation obs = observe(spec, state);
  return {std::move(state), std::move(obs)};
}

StepResult step(EnvState& state, const GameSpec& spec, const CommandIndex& cmd) {
  if (cmd.action >= spec.num_actions() || cmd.object >= spec.num_objects()) {
    throw SpecError("command", "command index outside the command space");
  }
  if (state.done || state.steps_taken >= spec.rules.episode_cap) {
    throw Error("step called on a finished episode");
  }
  ++state.steps_taken;

  StepResult result;
  result.reward = spec.rules.step_penalty;
  if (cmd.action == spec.move_action) {
    const int dest = spec.move_table[state.room][cmd.object];
    if (dest >= 0) state.room = static_cast<std::size_t>(dest);
  } else if (state.room == spec.quest_room[state.quest] &&
             cmd.action == spec.quest_action[state.quest] &&
             cmd.object == spec.quest_object[state.quest]) {
    result.quest_completed = true;
    result.reward += spec.rules.completion_reward;
  }
  result.done = result.quest_completed || state.steps_taken >= spec.rules.episode_cap;
  state.done = result.done;
  result.observation = observe(spec, state);
  return result;
}

StepResult step(EnvState& state, const GameSpec& spec, const Command& cmd) {
  return step(state, spec, to_index(spec, cmd));
}

CommandIndex to_index(const GameSpec& spec, const Command& cmd) {
  auto a = std::find(spec.actions.begin(), spec.actions.end(), cmd.action);
  auto o = std::find(spec.object_words.begin(), spec.object_words.end(), cmd.object);
  if (a == spec.actions.end()) throw SpecError("command.action", "unknown action '" + cmd.action + "'");
  if (o == spec.object_words.end()) {
    throw SpecError("command.object", "unknown object '" + cmd.object + "'");
  }
  return {static_cast<std::size_t>(a - spec.actions.begin()),
          static_cast<std::size_t>(o - spec.object_words.begin())};
}

Command to_command(const GameSpec& spec, const CommandIndex& cmd) {
  return {spec.actions.at(cmd.action), spec.object_words.at(cmd.object)};
}

std::vector<Command> command_space(const GameSpec& spec) {
  std::vector<Command> out;
  out.reserve(spec.num_actions() * spec.num_objects());
  for (const auto& a : spec.actions) {
    for (const auto& o : spec.object_words) out.push_back({a, o});
  }
  return out;
}

std::vector<std::vector<int>> room_distances(const GameSpec& spec) {
  const std::size_t n = spec.rooms.size();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t src = 0; src < n; ++src) {
    std::deque<std::size_t> frontier{src};
    dist[src][src] = 0;
    while (!frontier.empty()) {
      const std::size_t r = frontier.front();
      frontier.pop_front();
      for (int dest : spec.move_table[r]) {
        if (dest >= 0 && dist[src][static_cast<std::size_t>(dest)] < 0) {
          dist[src][static_cast<std::size_t>(dest)] = dist[src][r] + 1;
          frontier.push_back(static_cast<std::size_t>(dest));
        }
      }
    }
  }
  return dist;
}

CommandIndex optimal_command(const GameSpec& spec, std::size_t room, std::size_t quest) {
  const std::size_t target = spec.quest_room.at(quest);
  if (room == target) return {spec.quest_action[quest], spec.quest_object[quest]};
  const auto dist = room_distances(spec);
  if (dist[room][target] < 0) throw SpecError("quests", "quest target unreachable");
  for (std::size_t o = 0; o < spec.num_objects(); ++o) {
    const int dest = spec.move_table[room][o];
    if (dest >= 0 && dist[static_cast<std::size_t>(dest)][target] == dist[room][target] - 1) {
      return {spec.move_action, o};
    }
  }
  throw SpecError("exits", "no shortest-path move found");
}

double optimal_average_return(const GameSpec& spec) {
  const auto dist = room_distances(spec);
  long total_steps = 0;
  for (std::size_t r = 0; r < spec.rooms.size(); ++r) {
    for (std::size_t q = 0; q < spec.quests.size(); ++q) {
      const int d = dist[r][spec.quest_room[q]];
      if (d < 0) {
        throw SpecError("quests[" + std::to_string(q) + "].room",
                        "target unreachable from room '" + spec.rooms[r] + "'");
      }
      total_steps += d + 1;
    }
  }
  const double mean_steps =
      static_cast<double>(total_steps) / static_cast<double>(spec.num_starts());
  return spec.rules.completion_reward + spec.rules.step_penalty * mean_steps;
}

}  // namespace tgpd::env
