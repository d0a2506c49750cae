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

#include <functional>
#include <span>
#include <string>

#include "tgpd/agent/dqn.hpp"

namespace tgpd::analysis {

enum class Layer { kMeanPool, kRelu, kActionHead, kObjectHead };

// Only three combinations are meaningful: ReLU w.r.t. mean-pool, and each
// of a game's action and object heads w.r.t. ReLU.
struct LayerPair {
  Layer upstream = Layer::kMeanPool;
  Layer downstream = Layer::kRelu;

  static LayerPair relu_vs_mean_pool() { return {Layer::kMeanPool, Layer::kRelu}; }
  static LayerPair action_vs_relu() { return {Layer::kRelu, Layer::kActionHead}; }
  static LayerPair object_vs_relu() { return {Layer::kRelu, Layer::kObjectHead}; }
  static LayerPair parse(const std::string& name);

  // Throws ConfigError for combinations outside the three above.
  void validate() const;
  std::string name() const;
};

// Full jacobian d f(x) / d x of a vector function, one reverse sweep per
// output component. Result is [outputs x inputs].
nn::Tensor<double> jacobian(const std::function<nn::Var<double>(nn::Var<double>)>& f,
                            const nn::Tensor<double>& x);

// Elementwise mean over `states` of the jacobian of the downstream layer's
// output w.r.t. the upstream layer's output, using `game_id`'s head where
// relevant. States are token sequences in the model's own vocabulary.
nn::Tensor<double> mean_jacobian(const agent::LstmDqnNet<double>& model, const std::string& game_id,
                                 std::span<const env::TokenSeq> states, const LayerPair& pair);

nn::Tensor<double> mean_jacobian(const agent::Net& model, const std::string& game_id,
                                 std::span<const env::TokenSeq> states, const LayerPair& pair);

// Rolls the model epsilon-greedily in the game and returns the visited
// observations (model vocabulary ids), `count` of them.
std::vector<env::TokenSeq> sample_states(const agent::Net& model, const env::GameSpec& spec,
                                         std::span<const env::TokenId> token_map, std::size_t count,
                                         double epsilon, std::uint64_t seed);

}  // namespace tgpd::analysis
