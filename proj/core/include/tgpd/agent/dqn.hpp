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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tgpd/agent/network.hpp"
#include "tgpd/env/environment.hpp"
#include "tgpd/nn/optim.hpp"

namespace tgpd::agent {

using env::CommandIndex;
using env::TokenId;
using Net = LstmDqnNet<float>;

struct HyperParams {
  double gamma = 0.5;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  std::size_t epsilon_anneal_steps = 0;  // 0: half of the training budget
  double tau = 0.01;
  double lr = 1.0;
  double clip_norm = 5.0;
  std::size_t target_sync_interval = 500;  // parameter updates
  std::size_t batch_size = 32;
  std::size_t d_emb = 20;
  std::size_t hidden = 100;
  std::size_t linear1 = 100;
  int episode_cap = 20;
  std::size_t replay_capacity = 20000;
  std::size_t warmup = 500;
  std::size_t train_interval = 1;  // env steps per parameter update
  double eval_epsilon = 0.05;
  std::size_t eval_interval = 1000;  // env steps (updates for distillation)
  std::size_t eval_episodes = 48;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// Linear annealing from start to end over `steps`, constant afterwards.
double epsilon_at(double start, double end, std::size_t steps, std::size_t t);

struct Transition {
  TokenSeq state;
  CommandIndex command;
  double reward = 0.0;
  TokenSeq next_state;
  bool done = false;
};

// Fixed-capacity ring of transitions with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }
  std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

// Averaged pair value (Q(s,a) + Q(s,o)) / 2 maximised over the command space.
double max_pair_value(std::span<const float> q_action, std::span<const float> q_object);

// With probability epsilon a uniform (action, object) pair, otherwise the
// argmax of each head with ties to the lowest index.
CommandIndex select_command(std::span<const float> q_action, std::span<const float> q_object,
                            double epsilon, Rng& rng);

double td_target(double reward, bool done, double q_next_max, double gamma);

// Target-network values max_pair_value(s') memoised per observation. Valid
// only until the target network changes; sync_target() clears it.
class TargetCache {
 public:
  std::optional<double> find(const TokenSeq& tokens) const;
  void insert(const TokenSeq& tokens, double value);
  void clear() { values_.clear(); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  static std::string key(const TokenSeq& tokens);
  std::unordered_map<std::string, double> values_;
};

// One minibatch update of the squared TD loss on both taken slots. Returns
// the loss before the update.
double train_step(Net& net, const Net& target_net, const ReplayBuffer& buffer,
                  const HyperParams& hp, Rng& rng, std::size_t head = 0,
                  TargetCache* cache = nullptr);

void sync_target(const Net& net, Net& target_net, TargetCache* cache = nullptr);

struct LogRow {
  std::size_t step = 0;
  std::string game_id;
  double avg_reward = 0.0;
  double quest_completion = 0.0;
  double epsilon = 0.0;
  double loss = 0.0;
};

struct TrainingLog {
  std::vector<LogRow> rows;

  std::vector<LogRow> for_game(const std::string& game_id) const;
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

struct EvalResult {
  double avg_reward = 0.0;
  double quest_completion = 0.0;
};

using Policy = std::function<CommandIndex(const env::EnvState&, const env::Observation&, Rng&)>;

// Episode i starts in (room, quest) number i mod 16, so any multiple of the
// start count is a balanced sweep. Deterministic in `seed`.
EvalResult evaluate_policy(const env::GameSpec& spec, const Policy& policy, std::size_t episodes,
                           std::uint64_t seed);

// Maps a game's token ids onto a network's embedding rows. An empty map is
// the identity.
TokenSeq map_tokens(const TokenSeq& tokens, std::span<const TokenId> token_map);

EvalResult evaluate(const Net& net, const env::GameSpec& spec, std::size_t episodes,
                    std::uint64_t seed, double epsilon = 0.05, std::size_t head = 0,
                    std::span<const TokenId> token_map = {});

NetConfig teacher_config(const env::GameSpec& spec, const HyperParams& hp);

// One game the DQN loop rotates through.
struct DqnTask {
  const env::GameSpec* spec = nullptr;
  std::size_t head = 0;
  std::vector<TokenId> token_map;
};

// Q-learning over one or more games with a shared trunk. Games switch every
// episode and each game keeps its own replay buffer.
TrainingLog run_dqn(Net& net, std::span<const DqnTask> tasks, const HyperParams& hp,
                    std::uint64_t seed, std::size_t budget_steps);

struct TeacherResult {
  Net net;
  TrainingLog log;
};

TeacherResult train_teacher(const env::GameSpec& spec, const HyperParams& hp, std::uint64_t seed,
                            std::size_t budget_steps);

// Same loop with a caller-prepared network (e.g. transferred embeddings).
TrainingLog train_agent(Net& net, const env::GameSpec& spec, const HyperParams& hp,
                        std::uint64_t seed, std::size_t budget_steps);

}  // namespace tgpd::agent
