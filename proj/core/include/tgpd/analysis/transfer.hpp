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
#include <map>
#include <string>
#include <vector>

#include "tgpd/agent/dqn.hpp"

namespace tgpd::analysis {

// A1-A3: one single-game teacher; A4: the student; A5: nothing copied;
// A6: every teacher, with a seeded random source per shared word.
enum class TransferMode { kA1, kA2, kA3, kA4, kA5, kA6 };

TransferMode parse_transfer_mode(const std::string& name);
std::string to_string(TransferMode mode);

struct EmbeddingSource {
  std::string label;
  nn::Tensor<float> embedding;     // [|V_source| x d]
  std::vector<std::string> words;  // row order
};

struct TransferPlan {
  std::vector<EmbeddingSource> sources;
  const env::GameSpec* target = nullptr;
  TransferMode mode = TransferMode::kA5;
  bool freeze = true;
  std::uint64_t seed = 0;
};

struct TransferReport {
  std::map<std::string, std::vector<std::string>> copied;  // source label -> words
  std::size_t copied_rows = 0;
  std::size_t frozen_rows = 0;
};

// Copies embedding rows for words shared between source(s) and the target
// game into `target_agent` (whose vocabulary is the target game's) and
// freezes them when plan.freeze is set. A5 copies nothing and, with
// freeze, fixes every random row.
TransferReport transfer_initialize(const TransferPlan& plan, agent::Net& target_agent);

EmbeddingSource embedding_source(const std::string& label, const nn::Checkpoint& ckpt);

}  // namespace tgpd::analysis
