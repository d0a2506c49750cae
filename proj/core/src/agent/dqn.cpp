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

#include "tgpd/agent/dqn.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "tgpd/common/binary_io.hpp"

namespace tgpd::agent {

void HyperParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("hyperparameter " + what); };
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) fail("epsilon_start must lie in [0, 1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) fail("epsilon_end must lie in [0, 1]");
  if (!(eval_epsilon >= 0.0 && eval_epsilon <= 1.0)) fail("eval_epsilon must lie in [0, 1]");
  if (!(tau > 0.0)) fail("tau must be positive");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (clip_norm < 0.0) fail("clip_norm must be non-negative");
  if (target_sync_interval == 0) fail("target_sync_interval must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (d_emb == 0 || hidden == 0 || linear1 == 0) fail("layer sizes must be positive");
  if (episode_cap <= 0) fail("episode_cap must be positive");
  if (replay_capacity < batch_size) fail("replay_capacity must be at least batch_size");
  if (train_interval == 0) fail("train_interval must be positive");
  if (eval_interval == 0) fail("eval_interval must be positive");
  if (eval_episodes == 0) fail("eval_episodes must be positive");
}

double epsilon_at(double start, double end, std::size_t steps, std::size_t t) {
  if (steps == 0 || t >= steps) return end;
  const double frac = static_cast<double>(t) / static_cast<double>(steps);
  return start + (end - start) * frac;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(Rng& rng, std::size_t n) const {
  if (items_.empty()) throw Error("sampling from an empty replay buffer");
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = uniform_index(rng, items_.size());
  return out;
}

double max_pair_value(std::span<const float> q_action, std::span<const float> q_object) {
  const float a = *std::max_element(q_action.begin(), q_action.end());
  const float o = *std::max_element(q_object.begin(), q_object.end());
  return (static_cast<double>(a) + static_cast<double>(o)) / 2.0;
}

CommandIndex select_command(std::span<const float> q_action, std::span<const float> q_object,
                            double epsilon, Rng& rng) {
  if (q_action.empty() || q_object.empty()) throw ShapeError("select_command on empty heads");
  if (epsilon > 0.0 && uniform_real(rng) < epsilon) {
    return {uniform_index(rng, q_action.size()), uniform_index(rng, q_object.size())};
  }
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return {static_cast<std::size_t>(std::max_element(q_action.begin(), q_action.end()) - q_action.begin()),
          static_cast<std::size_t>(std::max_element(q_object.begin(), q_object.end()) - q_object.begin())};
}

double td_target(double reward, bool done, double q_next_max, double gamma) {
  return done ? reward : reward + gamma * q_next_max;
}

std::string TargetCache::key(const TokenSeq& tokens) {
  return std::string(reinterpret_cast<const char*>(tokens.data()), tokens.size() * sizeof(TokenId));
}

std::optional<double> TargetCache::find(const TokenSeq& tokens) const {
  auto it = values_.find(key(tokens));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void TargetCache::insert(const TokenSeq& tokens, double value) { values_[key(tokens)] = value; }

double train_step(Net& net, const Net& target_net, const ReplayBuffer& buffer, const HyperParams& hp,
                  Rng& rng, std::size_t head, TargetCache* cache) {
  if (buffer.size() < hp.batch_size) {
    throw Error("replay buffer holds " + std::to_string(buffer.size()) +
                " transitions, fewer than the batch size " + std::to_string(hp.batch_size));
  }
  const auto idx = buffer.sample_indices(rng, hp.batch_size);
  const std::size_t B = idx.size();

  std::vector<float> targets(B);
  std::vector<TokenSeq> pending;
  std::vector<std::size_t> pending_rows;
  for (std::size_t b = 0; b < B; ++b) {
    const auto& t = buffer.at(idx[b]);
    if (t.done) {
      targets[b] = static_cast<float>(t.reward);
    } else if (auto hit = cache ? cache->find(t.next_state) : std::nullopt) {
      targets[b] = static_cast<float>(td_target(t.reward, false, *hit, hp.gamma));
    } else {
      pending.push_back(t.next_state);
      pending_rows.push_back(b);
    }
  }
  if (!pending.empty()) {
    auto [qa, qo] = target_net.q_values(std::span<const TokenSeq>(pending), head);
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const double m = max_pair_value(qa.row(k), qo.row(k));
      if (cache) cache->insert(pending[k], m);
      const auto& t = buffer.at(idx[pending_rows[k]]);
      targets[pending_rows[k]] = static_cast<float>(td_target(t.reward, false, m, hp.gamma));
    }
  }

  std::vector<TokenSeq> states;
  std::vector<std::size_t> actions;
  std::vector<std::size_t> objects;
  states.reserve(B);
  for (std::size_t i : idx) {
    const auto& t = buffer.at(i);
    states.push_back(t.state);
    actions.push_back(t.command.action);
    objects.push_back(t.command.object);
  }

  Tape<float> tape;
  auto out = net.forward(tape, std::span<const TokenSeq>(states), head);
  const std::span<const float> ys(targets);
  Var<float> loss = nn::add(nn::squared_td_loss(out.q_action, std::span<const std::size_t>(actions), ys),
                            nn::squared_td_loss(out.q_object, std::span<const std::size_t>(objects), ys));
  const double value = loss.value()[0];
  tape.backward(loss);
  auto params = net.parameters();
  nn::sgd_update(std::span<Parameter<float>* const>(params), hp.lr, hp.clip_norm);
  return value;
}

void sync_target(const Net& net, Net& target_net, TargetCache* cache) {
  target_net = net;
  if (cache) cache->clear();
}

std::vector<LogRow> TrainingLog::for_game(const std::string& game_id) const {
  std::vector<LogRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [&](const LogRow& r) { return r.game_id == game_id; });
  return out;
}

std::string TrainingLog::to_csv() const {
  std::string out = "step,game_id,avg_reward,quest_completion,epsilon,loss\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.6f,%.6f,%.6f\n", r.step, r.game_id.c_str(),
                  r.avg_reward, r.quest_completion, r.epsilon, r.loss);
    out += buf;
  }
  return out;
}

void TrainingLog::write_csv(const std::filesystem::path& path) const {
  write_file_atomic(path, to_csv());
}

EvalResult evaluate_policy(const env::GameSpec& spec, const Policy& policy, std::size_t episodes,
                           std::uint64_t seed) {
  if (episodes == 0) throw ConfigError("evaluation needs at least one episode");
  Rng rng(derive_seed(seed, "eval-policy"));
  double total_reward = 0.0;
  std::size_t completed = 0;
  const std::size_t nq = spec.quests.size();
  for (std::size_t i = 0; i < episodes; ++i) {
    const std::size_t start = i % spec.num_starts();
    auto [state, obs] = env::reset_to(spec, start / nq, start % nq, derive_seed(seed, "eval-episode", i));
    bool done = false;
    while (!done) {
      const CommandIndex cmd = policy(state, obs, rng);
      auto res = env::step(state, spec, cmd);
      total_reward += res.reward;
      if (res.quest_completed) ++completed;
      done = res.done;
      obs = std::move(res.observation);
    }
  }
  const double n = static_cast<double>(episodes);
  return {total_reward / n, static_cast<double>(completed) / n};
}

TokenSeq map_tokens(const TokenSeq& tokens, std::span<const TokenId> token_map) {
  if (token_map.empty()) return tokens;
  TokenSeq out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) out.push_back(token_map[t]);
  return out;
}

EvalResult evaluate(const Net& net, const env::GameSpec& spec, std::size_t episodes,
                    std::uint64_t seed, double epsilon, std::size_t head,
                    std::span<const TokenId> token_map) {
  Policy policy = [&](const env::EnvState&, const env::Observation& obs, Rng& rng) {
    auto [qa, qo] = net.q_values(map_tokens(obs.tokens, token_map), head);
    return select_command(qa.values(), qo.values(), epsilon, rng);
  };
  return evaluate_policy(spec, policy, episodes, seed);
}

NetConfig teacher_config(const env::GameSpec& spec, const HyperParams& hp) {
  NetConfig cfg;
  cfg.vocab_size = spec.vocab.size();
  cfg.d_emb = hp.d_emb;
  cfg.hidden = hp.hidden;
  cfg.linear1 = hp.linear1;
  cfg.heads = {{spec.game_id, spec.num_actions(), spec.num_objects()}};
  return cfg;
}

TrainingLog run_dqn(Net& net, std::span<const DqnTask> tasks, const HyperParams& hp,
                    std::uint64_t seed, std::size_t budget_steps) {
  hp.validate();
  if (tasks.empty()) throw ConfigError("at least one game is required");
  std::vector<env::GameSpec> specs;
  for (const auto& t : tasks) {
    specs.push_back(*t.spec);
    specs.back().rules.episode_cap = hp.episode_cap;
  }
  std::vector<ReplayBuffer> buffers(tasks.size(), ReplayBuffer(hp.replay_capacity));
  std::vector<TargetCache> caches(tasks.size());
  Net target = net;

  Rng explore_rng(derive_seed(seed, "explore"));
  Rng replay_rng(derive_seed(seed, "replay"));
  const std::size_t anneal = hp.epsilon_anneal_steps ? hp.epsilon_anneal_steps : budget_steps / 2;

  TrainingLog log;
  std::size_t episode = 0;
  std::size_t task = 0;
  std::size_t updates = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  bool need_reset = true;
  env::EnvState state;
  TokenSeq tokens;

  for (std::size_t t = 0; t < budget_steps; ++t) {
    if (need_reset) {
      task = episode % tasks.size();
      auto [s, obs] = env::reset(specs[task], derive_seed(seed, "env", episode));
      state = std::move(s);
      tokens = map_tokens(obs.tokens, tasks[task].token_map);
      ++episode;
      need_reset = false;
    }
    const double eps = epsilon_at(hp.epsilon_start, hp.epsilon_end, anneal, t);
    auto [qa, qo] = net.q_values(tokens, tasks[task].head);
    const CommandIndex cmd = select_command(qa.values(), qo.values(), eps, explore_rng);
    auto res = env::step(state, specs[task], cmd);
    TokenSeq next = map_tokens(res.observation.tokens, tasks[task].token_map);
    buffers[task].push({tokens, cmd, res.reward, next, res.done});
    tokens = std::move(next);
    need_reset = res.done;

    auto& buf = buffers[task];
    if (buf.size() >= std::max(hp.warmup, hp.batch_size) && t % hp.train_interval == 0) {
      loss_sum += train_step(net, target, buf, hp, replay_rng, tasks[task].head, &caches[task]);
      ++loss_count;
      ++updates;
      if (updates % hp.target_sync_interval == 0) {
        target = net;
        for (auto& c : caches) c.clear();
      }
    }

    if ((t + 1) % hp.eval_interval == 0) {
      const double mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
      for (std::size_t k = 0; k < tasks.size(); ++k) {
        auto ev = evaluate(net, specs[k], hp.eval_episodes, derive_seed(seed, "eval", t + 1),
                           hp.eval_epsilon, tasks[k].head, tasks[k].token_map);
        log.rows.push_back({t + 1, specs[k].game_id, ev.avg_reward, ev.quest_completion, eps, mean_loss});
      }
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return log;
}

TrainingLog train_agent(Net& net, const env::GameSpec& spec, const HyperParams& hp,
                        std::uint64_t seed, std::size_t budget_steps) {
  const DqnTask task{&spec, net.head_index(spec.game_id), {}};
  return run_dqn(net, std::span<const DqnTask>(&task, 1), hp, seed, budget_steps);
}

TeacherResult train_teacher(const env::GameSpec& spec, const HyperParams& hp, std::uint64_t seed,
                            std::size_t budget_steps) {
  hp.validate();
  Net net(teacher_config(spec, hp), derive_seed(seed, "init"));
  TrainingLog log = train_agent(net, spec, hp, seed, budget_steps);
  return {std::move(net), std::move(log)};
}

}  // namespace tgpd::agent
