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

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tgpd/common/random.hpp"
#include "tgpd/env/vocabulary.hpp"
#include "tgpd/nn/checkpoint.hpp"
#include "tgpd/nn/lstm.hpp"

namespace tgpd::agent {

using env::TokenSeq;
using nn::Parameter;
using nn::Tape;
using nn::Tensor;
using nn::Var;

struct HeadSpec {
  std::string game_id;
  std::size_t actions = 0;
  std::size_t objects = 0;
  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

struct NetConfig {
  std::size_t vocab_size = 0;
  std::size_t d_emb = 20;
  std::size_t hidden = 100;
  std::size_t linear1 = 100;
  std::vector<HeadSpec> heads;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// Per-game output pair: action scores and object scores.
template <typename T>
struct ControllerHead {
  std::string game_id;
  Parameter<T> action_w;  // [D1 x |A|]
  Parameter<T> action_b;
  Parameter<T> object_w;  // [D1 x |O|]
  Parameter<T> object_b;
};

template <typename T>
struct TrunkOutput {
  Var<T> mean_pool;  // [B x H]
  Var<T> relu;       // [B x D1]
};

template <typename T>
struct QOutput {
  Var<T> mean_pool;
  Var<T> relu;
  Var<T> q_action;  // [B x |A|]
  Var<T> q_object;  // [B x |O|]
};

// Embedding -> LSTM over the tokens -> mean of the per-step hidden states ->
// linear + ReLU -> one (action, object) head pair per registered game.
// Teachers have a single head; students and multi-task agents have one per
// game over a shared trunk.
template <typename T>
class LstmDqnNet {
 public:
  LstmDqnNet() = default;

  LstmDqnNet(NetConfig config, std::uint64_t seed) : config_(std::move(config)) {
    allocate();
    Rng rng(seed);
    init_uniform(embedding_, rng, 0.5);
    const double lstm_scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
    init_uniform(lstm_.wx, rng, lstm_scale);
    init_uniform(lstm_.wh, rng, lstm_scale);
    for (std::size_t k = 0; k < config_.hidden; ++k) lstm_.b.value[config_.hidden + k] = T(1);
    init_uniform(linear1_w_, rng, 1.0 / std::sqrt(static_cast<double>(config_.hidden)));
    for (auto& h : heads_) {
      const double s = 1.0 / std::sqrt(static_cast<double>(config_.linear1));
      init_uniform(h.action_w, rng, s);
      init_uniform(h.object_w, rng, s);
    }
  }

  // Every parameter zero.
  static LstmDqnNet zeros(NetConfig config) {
    LstmDqnNet net;
    net.config_ = std::move(config);
    net.allocate();
    return net;
  }

  const NetConfig& config() const noexcept { return config_; }
  std::size_t num_heads() const noexcept { return heads_.size(); }
  const ControllerHead<T>& head(std::size_t i) const { return heads_.at(i); }
  ControllerHead<T>& head(std::size_t i) { return heads_.at(i); }

  std::size_t head_index(std::string_view game_id) const {
    for (std::size_t i = 0; i < heads_.size(); ++i) {
      if (heads_[i].game_id == game_id) return i;
    }
    throw ArchitectureError("network has no controller head for game '" + std::string(game_id) + "'");
  }

  Parameter<T>& embedding() noexcept { return embedding_; }
  const Parameter<T>& embedding() const noexcept { return embedding_; }
  nn::LstmBundle<T>& lstm() noexcept { return lstm_; }
  const nn::LstmBundle<T>& lstm() const noexcept { return lstm_; }
  Parameter<T>& linear1_w() noexcept { return linear1_w_; }
  Parameter<T>& linear1_b() noexcept { return linear1_b_; }
  const Parameter<T>& linear1_w() const noexcept { return linear1_w_; }
  const Parameter<T>& linear1_b() const noexcept { return linear1_b_; }

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out = {&embedding_, &lstm_.wx, &lstm_.wh, &lstm_.b,
                                      &linear1_w_, &linear1_b_};
    for (auto& h : heads_) {
      out.insert(out.end(), {&h.action_w, &h.action_b, &h.object_w, &h.object_b});
    }
    return out;
  }

  std::vector<const Parameter<T>*> parameters() const {
    auto mut = const_cast<LstmDqnNet*>(this)->parameters();
    return {mut.begin(), mut.end()};
  }

  // Shared trunk over a batch of (possibly different-length) sequences.
  TrunkOutput<T> trunk(Tape<T>& tape, std::span<const TokenSeq> seqs) {
    if (seqs.empty()) throw ShapeError("forward on an empty batch");
    std::size_t max_len = 0;
    std::vector<std::size_t> lengths;
    lengths.reserve(seqs.size());
    for (const auto& s : seqs) {
      if (s.empty()) throw ShapeError("forward on an empty observation");
      lengths.push_back(s.size());
      max_len = std::max(max_len, s.size());
    }
    const std::size_t B = seqs.size();
    const std::size_t H = config_.hidden;

    Var<T> table = tape.param(embedding_);
    auto w = nn::LstmVars<T>::bind(tape, lstm_);
    Var<T> h = tape.constant(Tensor<T>({B, H}));
    Var<T> c = tape.constant(Tensor<T>({B, H}));
    std::vector<Var<T>> outputs;
    outputs.reserve(max_len);
    std::vector<long> ids(B);
    for (std::size_t t = 0; t < max_len; ++t) {
      for (std::size_t b = 0; b < B; ++b) {
        ids[b] = t < lengths[b] ? static_cast<long>(seqs[b][t]) : -1;
      }
      Var<T> x = nn::gather_rows(table, std::span<const long>(ids));
      std::tie(h, c) = nn::lstm_step(w, x, h, c);
      outputs.push_back(h);
    }
    Var<T> pooled = nn::masked_sequence_mean(std::span<const Var<T>>(outputs),
                                             std::span<const std::size_t>(lengths));
    Var<T> pre = nn::add_bias(nn::matmul(pooled, tape.param(linear1_w_)), tape.param(linear1_b_));
    return {pooled, nn::relu(pre)};
  }

  std::pair<Var<T>, Var<T>> apply_head(Tape<T>& tape, Var<T> relu, std::size_t head) {
    auto& hd = heads_.at(head);
    Var<T> qa = nn::add_bias(nn::matmul(relu, tape.param(hd.action_w)), tape.param(hd.action_b));
    Var<T> qo = nn::add_bias(nn::matmul(relu, tape.param(hd.object_w)), tape.param(hd.object_b));
    return {qa, qo};
  }

  QOutput<T> forward(Tape<T>& tape, std::span<const TokenSeq> seqs, std::size_t head = 0) {
    if (head >= heads_.size()) throw ArchitectureError("head index out of range");
    auto tr = trunk(tape, seqs);
    auto [qa, qo] = apply_head(tape, tr.relu, head);
    return {tr.mean_pool, tr.relu, qa, qo};
  }

  // Q-values for a single observation. Runs the tape-free inference path.
  std::pair<Tensor<T>, Tensor<T>> q_values(const TokenSeq& tokens, std::size_t head = 0) const {
    auto [qa, qo] = q_values(std::span<const TokenSeq>(&tokens, 1), head);
    return {Tensor<T>({qa.cols()}, std::vector<T>(qa.values().begin(), qa.values().end())),
            Tensor<T>({qo.cols()}, std::vector<T>(qo.values().begin(), qo.values().end()))};
  }

  // Batched inference without a tape; returns [B x |A|] and [B x |O|].
  // Agrees with forward() up to floating-point reassociation.
  std::pair<Tensor<T>, Tensor<T>> q_values(std::span<const TokenSeq> seqs, std::size_t head = 0) const {
    using Matrix = typename Tensor<T>::Matrix;
    const auto& hd = heads_.at(head);
    Matrix pooled = pool(seqs);
    Matrix act = (pooled * linear1_w_.value.mat()).rowwise() + linear1_b_.value.mat().row(0);
    act = act.cwiseMax(T(0));
    Tensor<T> qa({seqs.size(), hd.action_b.value.size()});
    Tensor<T> qo({seqs.size(), hd.object_b.value.size()});
    qa.mat() = (act * hd.action_w.value.mat()).rowwise() + hd.action_b.value.mat().row(0);
    qo.mat() = (act * hd.object_w.value.mat()).rowwise() + hd.object_b.value.mat().row(0);
    return {std::move(qa), std::move(qo)};
  }

  // Mean of the LSTM hidden states over each sequence, without a tape.
  typename Tensor<T>::Matrix pool(std::span<const TokenSeq> seqs) const {
    using Matrix = typename Tensor<T>::Matrix;
    if (seqs.empty()) throw ShapeError("forward on an empty batch");
    const auto B = static_cast<Eigen::Index>(seqs.size());
    const std::size_t H = config_.hidden;
    const auto Hi = static_cast<Eigen::Index>(H);
    std::size_t max_len = 0;
    for (const auto& s : seqs) {
      if (s.empty()) throw ShapeError("forward on an empty observation");
      max_len = std::max(max_len, s.size());
    }
    Matrix h = Matrix::Zero(B, Hi), c = Matrix::Zero(B, Hi), sum = Matrix::Zero(B, Hi);
    Matrix x(B, static_cast<Eigen::Index>(config_.d_emb)), z(B, 4 * Hi);
    const auto emb = embedding_.value.mat();
    for (std::size_t t = 0; t < max_len; ++t) {
      for (Eigen::Index b = 0; b < B; ++b) {
        const auto& s = seqs[static_cast<std::size_t>(b)];
        if (t < s.size()) {
          if (s[t] >= config_.vocab_size) throw ShapeError("embedding id out of range");
          x.row(b) = emb.row(static_cast<Eigen::Index>(s[t]));
        } else {
          x.row(b).setZero();
        }
      }
      z.noalias() = x * lstm_.wx.value.mat();
      z.noalias() += h * lstm_.wh.value.mat();
      z.rowwise() += lstm_.b.value.mat().row(0);
      for (Eigen::Index b = 0; b < B; ++b) {
        if (t >= seqs[static_cast<std::size_t>(b)].size()) continue;
        for (Eigen::Index k = 0; k < Hi; ++k) {
          const T i = nn::detail::sigmoid(z(b, k));
          const T f = nn::detail::sigmoid(z(b, Hi + k));
          const T g = std::tanh(z(b, 2 * Hi + k));
          const T o = nn::detail::sigmoid(z(b, 3 * Hi + k));
          c(b, k) = f * c(b, k) + i * g;
          h(b, k) = o * std::tanh(c(b, k));
          sum(b, k) += h(b, k);
        }
      }
    }
    for (Eigen::Index b = 0; b < B; ++b) {
      sum.row(b) /= static_cast<T>(seqs[static_cast<std::size_t>(b)].size());
    }
    return sum;
  }

  nn::Checkpoint to_checkpoint(std::vector<std::string> vocabulary) const {
    if (vocabulary.size() != config_.vocab_size) {
      throw ArchitectureError("vocabulary size does not match the embedding table");
    }
    nn::Checkpoint ckpt;
    for (const auto* p : parameters()) ckpt.arrays.push_back(nn::to_named_array(*p));
    ckpt.vocabulary = std::move(vocabulary);
    return ckpt;
  }

  // Rebuilds a network from checkpoint arrays. The architecture (sizes and
  // heads) is inferred from the array shapes and names.
  static LstmDqnNet from_checkpoint(const nn::Checkpoint& ckpt) {
    auto get = [&](const std::string& name) -> const nn::NamedArray& {
      const auto* a = ckpt.find(name);
      if (!a) throw ArchitectureError("checkpoint is missing array '" + name + "'");
      return *a;
    };
    NetConfig cfg;
    const auto& emb = get("embedding");
    const auto& wh = get("lstm.wh");
    const auto& l1 = get("linear1.w");
    if (emb.shape.size() != 2 || wh.shape.size() != 2 || l1.shape.size() != 2) {
      throw ArchitectureError("checkpoint arrays have unexpected rank");
    }
    cfg.vocab_size = emb.shape[0];
    cfg.d_emb = emb.shape[1];
    cfg.hidden = wh.shape[0];
    cfg.linear1 = l1.shape[1];
    if (ckpt.vocabulary.size() != cfg.vocab_size) {
      throw ArchitectureError("checkpoint vocabulary has " + std::to_string(ckpt.vocabulary.size()) +
                              " words but the embedding has " + std::to_string(cfg.vocab_size) + " rows");
    }
    const std::string prefix = "head.";
    const std::string suffix = ".action.w";
    for (const auto& a : ckpt.arrays) {
      if (a.name.starts_with(prefix) && a.name.ends_with(suffix) && a.shape.size() == 2) {
        std::string gid = a.name.substr(prefix.size(), a.name.size() - prefix.size() - suffix.size());
        const auto& ow = get(prefix + gid + ".object.w");
        if (ow.shape.size() != 2) throw ArchitectureError("head '" + gid + "' has bad rank");
        cfg.heads.push_back({gid, a.shape[1], ow.shape[1]});
      }
    }
    if (cfg.heads.empty()) throw ArchitectureError("checkpoint has no controller heads");
    LstmDqnNet net = zeros(cfg);
    for (auto* p : net.parameters()) {
      const auto& a = get(p->name);
      if (a.shape != p->value.shape()) {
        throw ArchitectureError("array '" + p->name + "' has shape " + nn::shape_string(a.shape) +
                                ", expected " + nn::shape_string(p->value.shape()));
      }
      for (std::size_t i = 0; i < a.values.size(); ++i) p->value[i] = static_cast<T>(a.values[i]);
    }
    return net;
  }

  template <typename U>
  LstmDqnNet<U> cast() const {
    auto out = LstmDqnNet<U>::zeros(config_);
    auto src = parameters();
    auto dst = out.parameters();
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i]->value = src[i]->value.template cast<U>();
      dst[i]->frozen = src[i]->frozen;
      dst[i]->frozen_rows = src[i]->frozen_rows;
    }
    return out;
  }

  // Bitwise equality of all parameter values.
  bool same_parameters(const LstmDqnNet& other) const {
    auto a = parameters();
    auto b = other.parameters();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i]->value == b[i]->value)) return false;
    }
    return true;
  }

 private:
  static void init_uniform(Parameter<T>& p, Rng& rng, double scale) {
    for (auto& v : p.value.values()) v = static_cast<T>((2.0 * uniform_real(rng) - 1.0) * scale);
  }

  void allocate() {
    const auto& c = config_;
    if (c.vocab_size == 0 || c.d_emb == 0 || c.hidden == 0 || c.linear1 == 0 || c.heads.empty()) {
      throw ArchitectureError("network sizes must be positive and at least one head is required");
    }
    embedding_ = Parameter<T>("embedding", Tensor<T>({c.vocab_size, c.d_emb}));
    lstm_.wx = Parameter<T>("lstm.wx", Tensor<T>({c.d_emb, 4 * c.hidden}));
    lstm_.wh = Parameter<T>("lstm.wh", Tensor<T>({c.hidden, 4 * c.hidden}));
    lstm_.b = Parameter<T>("lstm.b", Tensor<T>({4 * c.hidden}));
    linear1_w_ = Parameter<T>("linear1.w", Tensor<T>({c.hidden, c.linear1}));
    linear1_b_ = Parameter<T>("linear1.b", Tensor<T>({c.linear1}));
    heads_.clear();
    for (const auto& hs : c.heads) {
      const std::string p = "head." + hs.game_id;
      heads_.push_back({hs.game_id,
                        Parameter<T>(p + ".action.w", Tensor<T>({c.linear1, hs.actions})),
                        Parameter<T>(p + ".action.b", Tensor<T>({hs.actions})),
                        Parameter<T>(p + ".object.w", Tensor<T>({c.linear1, hs.objects})),
                        Parameter<T>(p + ".object.b", Tensor<T>({hs.objects}))});
    }
  }

  NetConfig config_;
  Parameter<T> embedding_;
  nn::LstmBundle<T> lstm_;
  Parameter<T> linear1_w_;
  Parameter<T> linear1_b_;
  std::vector<ControllerHead<T>> heads_;
};

}  // namespace tgpd::agent
