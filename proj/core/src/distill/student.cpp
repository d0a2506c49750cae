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

#include "tgpd/distill/student.hpp"

#include <algorithm>
#include <cmath>

namespace tgpd::distill {
namespace {

nn::Tensor<float> soft_targets(std::span<const DistillSample* const> batch, bool action_head, float tau) {
  const std::size_t n = action_head ? batch[0]->q_action.size() : batch[0]->q_object.size();
  nn::Tensor<double> q({batch.size(), n});
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto& src = action_head ? batch[r]->q_action : batch[r]->q_object;
    if (src.size() != n) throw ShapeError("distill_loss: ragged teacher vectors in batch");
    std::copy(src.begin(), src.end(), q.row(r).begin());
  }
  return nn::softmax_t(q, static_cast<double>(tau)).cast<float>();
}

}  // namespace

std::pair<nn::Tensor<float>, nn::Tensor<float>> StudentNet::forward(const env::TokenSeq& union_tokens,
                                                                    const std::string& game_id) const {
  return net.q_values(union_tokens, net.head_index(game_id));
}

std::pair<nn::Tensor<float>, nn::Tensor<float>> StudentNet::forward_game(const env::TokenSeq& game_tokens,
                                                                         const std::string& game_id) const {
  return forward(agent::map_tokens(game_tokens, vocab.token_map(game_id)), game_id);
}

agent::NetConfig multi_head_config(const UnionVocab& vocab, std::span<const env::GameSpec* const> specs,
                                   const agent::HyperParams& hp) {
  agent::NetConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.d_emb = hp.d_emb;
  cfg.hidden = hp.hidden;
  cfg.linear1 = hp.linear1;
  for (const auto* s : specs) cfg.heads.push_back({s->game_id, s->num_actions(), s->num_objects()});
  return cfg;
}

StudentNet make_student(std::span<const env::GameSpec* const> specs, const agent::HyperParams& hp,
                        std::uint64_t seed) {
  hp.validate();
  UnionVocab vocab = UnionVocab::build(specs);
  agent::Net net(multi_head_config(vocab, specs, hp), derive_seed(seed, "init"));
  return {std::move(vocab), std::move(net)};
}

StudentNet load_student(const nn::Checkpoint& ckpt, std::span<const env::GameSpec* const> specs) {
  agent::Net net = agent::Net::from_checkpoint(ckpt);
  std::string missing;
  for (const auto* s : specs) {
    const auto& heads = net.config().heads;
    const bool found = std::any_of(heads.begin(), heads.end(),
                                   [&](const agent::HeadSpec& h) { return h.game_id == s->game_id; });
    if (!found) missing += (missing.empty() ? "" : ", ") + s->game_id;
  }
  if (!missing.empty()) {
    throw ArchitectureError("checkpoint lacks controller heads for: " + missing);
  }
  return {UnionVocab::from_words(ckpt.vocabulary, specs), std::move(net)};
}

nn::Var<float> distill_loss(std::span<const DistillSample* const> batch, nn::Var<float> student_q_action,
                            nn::Var<float> student_q_object, float tau) {
  if (batch.empty()) throw ShapeError("distill_loss on an empty batch");
  const auto ta = soft_targets(batch, true, tau);
  const auto to = soft_targets(batch, false, tau);
  if (ta.cols() != student_q_action.value().cols() || to.cols() != student_q_object.value().cols()) {
    throw ShapeError("distill_loss: teacher and student head sizes differ");
  }
  return nn::add(nn::kl_loss(ta, student_q_action), nn::kl_loss(to, student_q_object));
}

double distill_loss_value(const DistillSample& sample, std::span<const double> student_q_action,
                          std::span<const double> student_q_object, double tau) {
  if (sample.q_action.size() != student_q_action.size() ||
      sample.q_object.size() != student_q_object.size()) {
    throw ShapeError("distill_loss: teacher and student head sizes differ");
  }
  auto head_kl = [tau](const std::vector<float>& teacher, std::span<const double> logits) {
    nn::Tape<double> tape;
    auto p = nn::softmax_t(nn::Tensor<double>::vector({teacher.begin(), teacher.end()}), tau);
    auto q = tape.constant(nn::Tensor<double>::vector({logits.begin(), logits.end()}));
    return nn::kl_loss(p, q).value()[0];
  };
  return head_kl(sample.q_action, student_q_action) + head_kl(sample.q_object, student_q_object);
}

std::size_t updates_per_epoch(const TeacherStore& store, std::size_t batch_size) {
  std::size_t total = 0;
  for (const auto& [gid, gs] : store) total += (gs.samples.size() + batch_size - 1) / batch_size;
  return total;
}

DistillResult train_student(const TeacherStore& store, StudentNet& student,
                            std::span<const env::GameSpec* const> specs, const agent::HyperParams& hp,
                            std::uint64_t seed, const DistillOptions& options) {
  hp.validate();
  if (options.turn_minibatches == 0) throw ConfigError("turn_minibatches must be positive");
  struct GameData {
    const env::GameSpec* spec;
    const GameStore* store;
    std::size_t head;
    std::vector<env::TokenSeq> tokens;
  };
  std::vector<GameData> games;
  for (const auto* s : specs) {
    auto it = store.find(s->game_id);
    if (it == store.end() || it->second.samples.empty()) {
      throw ConfigError("teacher store for game '" + s->game_id + "' is empty");
    }
    const auto& map = student.vocab.token_map(s->game_id);
    GameData gd{s, &it->second, student.head_index(s->game_id), {}};
    gd.tokens.reserve(it->second.samples.size());
    for (const auto& sample : it->second.samples) gd.tokens.push_back(agent::map_tokens(sample.tokens, map));
    games.push_back(std::move(gd));
  }
  if (games.empty()) throw ConfigError("no games registered for distillation");

  DistillResult result;
  for (const auto& g : games) result.minibatches_per_game[g.spec->game_id] = 0;
  Rng rng(derive_seed(seed, "distill"));
  auto params = student.net.parameters();
  const float tau = static_cast<float>(hp.tau);
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  for (std::size_t u = 0; u < options.updates; ++u) {
    auto& g = games[(u / options.turn_minibatches) % games.size()];
    std::vector<const DistillSample*> batch;
    std::vector<env::TokenSeq> seqs;
    for (std::size_t b = 0; b < hp.batch_size; ++b) {
      const std::size_t i = uniform_index(rng, g.store->samples.size());
      batch.push_back(&g.store->samples[i]);
      seqs.push_back(g.tokens[i]);
    }
    nn::Tape<float> tape;
    auto out = student.net.forward(tape, std::span<const env::TokenSeq>(seqs), g.head);
    auto loss = distill_loss(std::span<const DistillSample* const>(batch), out.q_action, out.q_object, tau);
    loss_sum += loss.value()[0];
    ++loss_count;
    tape.backward(loss);
    nn::sgd_update(std::span<nn::Parameter<float>* const>(params), hp.lr, hp.clip_norm);
    ++result.minibatches_per_game[g.spec->game_id];

    if ((u + 1) % hp.eval_interval == 0) {
      const double mean_loss = loss_sum / static_cast<double>(loss_count);
      for (const auto& eg : games) {
        auto ev = agent::evaluate(student.net, *eg.spec, hp.eval_episodes, derive_seed(seed, "eval", u + 1),
                                  hp.eval_epsilon, eg.head, student.vocab.token_map(eg.spec->game_id));
        result.log.rows.push_back(
            {u + 1, eg.spec->game_id, ev.avg_reward, ev.quest_completion, hp.eval_epsilon, mean_loss});
      }
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return result;
}

double policy_agreement(const StudentNet& student, const GameStore& store) {
  if (store.samples.empty()) throw ConfigError("policy agreement on an empty store");
  std::size_t agree = 0;
  auto argmax = [](std::span<const float> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  for (const auto& s : store.samples) {
    auto [qa, qo] = student.forward_game(s.tokens, store.game_id);
    if (argmax(qa.values()) == argmax(s.q_action) && argmax(qo.values()) == argmax(s.q_object)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(store.samples.size());
}

}  // namespace tgpd::distill
