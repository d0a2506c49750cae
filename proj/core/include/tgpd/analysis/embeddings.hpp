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

#include <filesystem>
#include <span>
#include <string>

#include "tgpd/agent/dqn.hpp"

namespace tgpd::analysis {

// One row `word,game_id,h_1,...,h_H` per word of each game's vocabulary:
// the hidden state after a single LSTM step from the zero state on that
// word. `model_vocab` lists the model's embedding rows in order.
std::string word_embeddings_csv(const agent::Net& model, const env::Vocabulary& model_vocab,
                                std::span<const env::GameSpec* const> games);

void export_word_embeddings(const agent::Net& model, const env::Vocabulary& model_vocab,
                            std::span<const env::GameSpec* const> games,
                            const std::filesystem::path& out_path);

}  // namespace tgpd::analysis
