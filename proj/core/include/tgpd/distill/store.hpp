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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tgpd/agent/dqn.hpp"

namespace tgpd::distill {

inline constexpr char kStoreMagic[4] = {'T', 'G', 'D', 'S'};
inline constexpr std::uint32_t kStoreVersion = 1;

// One teacher-labelled observation. Tokens use the game's own vocabulary
// ids; q vectors are the teacher's raw (unnormalised) outputs.
struct DistillSample {
  env::TokenSeq tokens;
  std::vector<float> q_action;
  std::vector<float> q_object;
  std::string game_id;
};

struct GameStore {
  std::string game_id;
  std::size_t num_actions = 0;
  std::size_t num_objects = 0;
  std::vector<DistillSample> samples;
};

// game_id -> samples produced by that game's teacher only.
using TeacherStore = std::map<std::string, GameStore>;

std::string encode_store(const GameStore& store);
GameStore decode_store(std::string_view bytes);
void save_store(const GameStore& store, const std::filesystem::path& path);
GameStore load_store(const std::filesystem::path& path);

// Rolls the teacher epsilon-greedily and records every visited state with
// the teacher's full Q-vectors. Deterministic in `seed`.
GameStore generate_teacher_data(const agent::Net& teacher, const env::GameSpec& spec,
                                std::size_t n_samples, double epsilon_gen, std::uint64_t seed,
                                int episode_cap = 20);

}  // namespace tgpd::distill
