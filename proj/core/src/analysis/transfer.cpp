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

#include "tgpd/analysis/transfer.hpp"

#include <unordered_map>

namespace tgpd::analysis {

TransferMode parse_transfer_mode(const std::string& name) {
  static const std::map<std::string, TransferMode> modes = {
      {"A1", TransferMode::kA1}, {"A2", TransferMode::kA2}, {"A3", TransferMode::kA3},
      {"A4", TransferMode::kA4}, {"A5", TransferMode::kA5}, {"A6", TransferMode::kA6}};
  auto it = modes.find(name);
  if (it == modes.end()) throw ConfigError("unknown transfer mode '" + name + "' (expected A1..A6)");
  return it->second;
}

std::string to_string(TransferMode mode) {
  return "A" + std::to_string(static_cast<int>(mode) + 1);
}

EmbeddingSource embedding_source(const std::string& label, const nn::Checkpoint& ckpt) {
  const auto* emb = ckpt.find("embedding");
  if (!emb || emb->shape.size() != 2) throw ArchitectureError(label + ": checkpoint has no embedding matrix");
  if (emb->shape[0] != ckpt.vocabulary.size()) {
    throw ArchitectureError(label + ": embedding rows do not match the checkpoint vocabulary");
  }
  EmbeddingSource src;
  src.label = label;
  src.embedding = nn::Tensor<float>(emb->shape, emb->values);
  src.words = ckpt.vocabulary;
  return src;
}

TransferReport transfer_initialize(const TransferPlan& plan, agent::Net& target_agent) {
  if (!plan.target) throw ConfigError("transfer plan has no target game");
  const auto& target_words = plan.target->vocab.words();
  auto& emb = target_agent.embedding();
  if (emb.value.rows() != target_words.size()) {
    throw ArchitectureError("target agent embeds " + std::to_string(emb.value.rows()) +
                            " words but " + plan.target->game_id + " has " +
                            std::to_string(target_words.size()));
  }
  const std::size_t d = emb.value.cols();

  std::size_t expected_sources = 0;
  switch (plan.mode) {
    case TransferMode::kA1:
    case TransferMode::kA2:
    case TransferMode::kA3:
    case TransferMode::kA4: expected_sources = 1; break;
    case TransferMode::kA5: break;
    case TransferMode::kA6:
      if (plan.sources.empty()) throw ConfigError("A6 needs at least one source model");
      break;
  }
  if (expected_sources && plan.sources.size() != expected_sources) {
    throw ConfigError(to_string(plan.mode) + " takes exactly one source model, got " +
                      std::to_string(plan.sources.size()));
  }

  TransferReport report;
  if (plan.mode == TransferMode::kA5) {
    if (plan.freeze) {
      for (std::size_t r = 0; r < target_words.size(); ++r) emb.freeze_row(r);
      report.frozen_rows = target_words.size();
    }
    return report;
  }

  std::vector<std::unordered_map<std::string, std::size_t>> index(plan.sources.size());
  for (std::size_t s = 0; s < plan.sources.size(); ++s) {
    const auto& src = plan.sources[s];
    if (src.embedding.cols() != d) {
      throw ShapeError(src.label + " embeds words in " + std::to_string(src.embedding.cols()) +
                       " dimensions, target uses " + std::to_string(d));
    }
    if (src.embedding.rows() != src.words.size()) {
      throw ArchitectureError(src.label + ": embedding rows do not match its vocabulary");
    }
    for (std::size_t r = 0; r < src.words.size(); ++r) index[s].emplace(src.words[r], r);
    report.copied[src.label];
  }

  Rng rng(derive_seed(plan.seed, "transfer"));
  std::vector<std::size_t> holders;
  for (std::size_t w = 0; w < target_words.size(); ++w) {
    holders.clear();
    for (std::size_t s = 0; s < plan.sources.size(); ++s) {
      if (index[s].count(target_words[w])) holders.push_back(s);
    }
    if (holders.empty()) continue;
    const std::size_t s = holders.size() == 1 ? holders[0] : holders[uniform_index(rng, holders.size())];
    const auto& src = plan.sources[s];
    const std::size_t row = index[s].at(target_words[w]);
    for (std::size_t k = 0; k < d; ++k) emb.value(w, k) = src.embedding(row, k);
    report.copied[src.label].push_back(target_words[w]);
    ++report.copied_rows;
    if (plan.freeze) {
      emb.freeze_row(w);
      ++report.frozen_rows;
    }
  }
  return report;
}

}  // namespace tgpd::analysis
