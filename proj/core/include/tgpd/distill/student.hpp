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
#include <span>
#include <string>
#include <vector>

#include "tgpd/agent/dqn.hpp"
#include "tgpd/distill/store.hpp"
#include "tgpd/distill/union_vocab.hpp"

namespace tgpd::distill {

// Shared embedding/LSTM/linear trunk over the union vocabulary and one
// controller head pair per game, selected by game id.
struct StudentNet {
  UnionVocab vocab;
  agent::Net net;

  std::size_t head_index(const std::string& game_id) const { return net.head_index(game_id); }
  std::pair<nn::Tensor<float>, nn::Tensor<float>> forward(const env::TokenSeq& union_tokens,
                                                          const std::string& game_id) const;
  // Forward on game-vocabulary tokens.
  std::pair<nn::Tensor<float>, nn::Tensor<float>> forward_game(const env::TokenSeq& game_tokens,
                                                               const std::string& game_id) const;
};

agent::NetConfig multi_head_config(const UnionVocab& vocab, std::span<const env::GameSpec* const> specs,
                                   const agent::HyperParams& hp);

StudentNet make_student(std::span<const env::GameSpec* const> specs, const agent::HyperParams& hp,
                        std::uint64_t seed);

// Loads a multi-head checkpoint and checks that every game has a head.
// Throws ArchitectureError naming the missing heads.
StudentNet load_student(const nn::Checkpoint& ckpt, std::span<const env::GameSpec* const> specs);

// Sum over the action and object heads of mean-over-batch
// KL(softmax(q_teacher / tau) || softmax(q_student)).
nn::Var<float> distill_loss(std::span<const DistillSample* const> batch, nn::Var<float> student_q_action,
                            nn::Var<float> student_q_object, float tau);

// Same loss for one sample on raw tensors, evaluated in double.
double distill_loss_value(const DistillSample& sample, std::span<const double> student_q_action,
                          std::span<const double> student_q_object, double tau);

// Students run at a lower rate than teachers. At the teacher rate the
// sharp KL targets can kill every ReLU of a narrow student early on.
inline constexpr double kDefaultStudentLr = 0.3;

struct DistillOptions {
  std::size_t updates = 2000;          // minibatch updates over all games
  std::size_t turn_minibatches = 1;    // minibatches per game per round-robin turn
};

struct DistillResult {
  agent::TrainingLog log;
  std::map<std::string, std::size_t> minibatches_per_game;
};

std::size_t updates_per_epoch(const TeacherStore& store, std::size_t batch_size);

// Round-robin supervised training of the student on the per-game stores.
// Logs an evaluation row per game every hp.eval_interval updates.
DistillResult train_student(const TeacherStore& store, StudentNet& student,
                            std::span<const env::GameSpec* const> specs, const agent::HyperParams& hp,
                            std::uint64_t seed, const DistillOptions& options);

// Fraction of samples where the student's greedy command equals the teacher's.
double policy_agreement(const StudentNet& student, const GameStore& store);

struct MultitaskResult {
  UnionVocab vocab;
  agent::Net net;
  agent::TrainingLog log;
};

// Multi-task Q-learning baseline: shared trunk, one head per game, one
// replay buffer per game, game switched every episode.
MultitaskResult train_multitask_lstm_dqn(std::span<const env::GameSpec* const> specs,
                                         const agent::HyperParams& hp, std::uint64_t seed,
                                         std::size_t budget_steps);

}  // namespace tgpd::distill
