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

#include "tgpd/analysis/embeddings.hpp"

#include <cstdio>

#include "tgpd/common/binary_io.hpp"

namespace tgpd::analysis {

std::string word_embeddings_csv(const agent::Net& model, const env::Vocabulary& model_vocab,
                                std::span<const env::GameSpec* const> games) {
  if (model_vocab.size() != model.config().vocab_size) {
    throw ArchitectureError("vocabulary has " + std::to_string(model_vocab.size()) +
                            " words but the model embeds " + std::to_string(model.config().vocab_size));
  }
  std::string out;
  char buf[32];
  for (const auto* spec : games) {
    for (const auto& word : spec->vocab.words()) {
      auto id = model_vocab.find(word);
      if (!id) {
        throw ArchitectureError("word '" + word + "' of " + spec->game_id + " is not in the model vocabulary");
      }
      const env::TokenSeq single{*id};
      // The mean over a one-token sequence is the first hidden state.
      auto h = model.pool(std::span<const env::TokenSeq>(&single, 1));
      out += word;
      out += ',';
      out += spec->game_id;
      for (Eigen::Index k = 0; k < h.cols(); ++k) {
        std::snprintf(buf, sizeof buf, ",%.6f", static_cast<double>(h(0, k)));
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

void export_word_embeddings(const agent::Net& model, const env::Vocabulary& model_vocab,
                            std::span<const env::GameSpec* const> games,
                            const std::filesystem::path& out_path) {
  write_file_atomic(out_path, word_embeddings_csv(model, model_vocab, games));
}

}  // namespace tgpd::analysis
