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

namespace tgpd::distill {

MultitaskResult train_multitask_lstm_dqn(std::span<const env::GameSpec* const> specs,
                                         const agent::HyperParams& hp, std::uint64_t seed,
                                         std::size_t budget_steps) {
  hp.validate();
  UnionVocab vocab = UnionVocab::build(specs);
  agent::Net net(multi_head_config(vocab, specs, hp), derive_seed(seed, "init"));
  std::vector<agent::DqnTask> tasks;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    tasks.push_back({specs[i], i, vocab.token_map(specs[i]->game_id)});
  }
  auto log = agent::run_dqn(net, std::span<const agent::DqnTask>(tasks), hp, seed, budget_steps);
  return {std::move(vocab), std::move(net), std::move(log)};
}

}  // namespace tgpd::distill
