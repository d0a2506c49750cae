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

#include "tgpd/analysis/jacobian.hpp"

#include "tgpd/nn/ops.hpp"

namespace tgpd::analysis {
namespace {

const char* layer_name(Layer l) {
  switch (l) {
    case Layer::kMeanPool: return "mean_pool";
    case Layer::kRelu: return "relu";
    case Layer::kActionHead: return "action";
    case Layer::kObjectHead: return "object";
  }
  return "?";
}

using nn::Tensor;
using nn::Var;

Tensor<double> row_tensor(const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& m,
                          Eigen::Index r) {
  Tensor<double> t({1, static_cast<std::size_t>(m.cols())});
  t.mat().row(0) = m.row(r);
  return t;
}

}  // namespace

LayerPair LayerPair::parse(const std::string& name) {
  if (name == "relu-mean_pool" || name == "relu_vs_mean_pool") return relu_vs_mean_pool();
  if (name == "action-relu" || name == "action_vs_relu") return action_vs_relu();
  if (name == "object-relu" || name == "object_vs_relu") return object_vs_relu();
  throw ConfigError("unknown layer pair '" + name +
                    "' (expected relu-mean_pool, action-relu or object-relu)");
}

void LayerPair::validate() const {
  const bool ok = (upstream == Layer::kMeanPool && downstream == Layer::kRelu) ||
                  (upstream == Layer::kRelu &&
                   (downstream == Layer::kActionHead || downstream == Layer::kObjectHead));
  if (!ok) throw ConfigError("layer pair " + name() + " is not supported");
}

std::string LayerPair::name() const {
  return std::string(layer_name(downstream)) + "-" + layer_name(upstream);
}

Tensor<double> jacobian(const std::function<Var<double>(Var<double>)>& f, const Tensor<double>& x) {
  nn::Tape<double> tape;
  Var<double> in = tape.input(x);
  Var<double> out = f(in);
  const std::size_t n_out = out.value().size();
  const std::size_t n_in = x.size();
  Tensor<double> jac({n_out, n_in});
  Tensor<double> seed(out.shape());
  for (std::size_t j = 0; j < n_out; ++j) {
    seed.fill(0.0);
    seed[j] = 1.0;
    tape.backward(out, seed);
    const auto& g = tape.grad(in.id());
    for (std::size_t i = 0; i < n_in; ++i) jac(j, i) = g[i];
  }
  return jac;
}

Tensor<double> mean_jacobian(const agent::LstmDqnNet<double>& model, const std::string& game_id,
                             std::span<const env::TokenSeq> states, const LayerPair& pair) {
  pair.validate();
  if (states.empty()) throw ConfigError("mean_jacobian needs at least one state");
  const std::size_t head = model.head_index(game_id);
  const auto& hd = model.head(head);

  // Weights enter the tape as constants so the sweeps cannot touch the
  // model's gradient buffers.
  const Tensor<double>* w = nullptr;
  const Tensor<double>* b = nullptr;
  if (pair.downstream == Layer::kRelu) {
    w = &model.linear1_w().value;
    b = &model.linear1_b().value;
  } else if (pair.downstream == Layer::kActionHead) {
    w = &hd.action_w.value;
    b = &hd.action_b.value;
  } else {
    w = &hd.object_w.value;
    b = &hd.object_b.value;
  }
  const bool with_relu = pair.downstream == Layer::kRelu;
  auto f = [&](Var<double> x) {
    auto& tape = *x.tape();
    Var<double> y = nn::add_bias(nn::matmul(x, tape.constant(*w)), tape.constant(*b));
    return with_relu ? nn::relu(y) : y;
  };

  auto pooled = model.pool(states);
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix upstream = pooled;
  if (pair.upstream == Layer::kRelu) {
    upstream = (pooled * model.linear1_w().value.mat()).rowwise() + model.linear1_b().value.mat().row(0);
    upstream = upstream.cwiseMax(0.0);
  }

  Tensor<double> total({w->cols(), w->rows()});
  for (Eigen::Index r = 0; r < upstream.rows(); ++r) {
    total.mat() += jacobian(f, row_tensor(upstream, r)).mat();
  }
  total.mat() /= static_cast<double>(states.size());
  return total;
}

Tensor<double> mean_jacobian(const agent::Net& model, const std::string& game_id,
                             std::span<const env::TokenSeq> states, const LayerPair& pair) {
  return mean_jacobian(model.cast<double>(), game_id, states, pair);
}

std::vector<env::TokenSeq> sample_states(const agent::Net& model, const env::GameSpec& spec,
                                         std::span<const env::TokenId> token_map, std::size_t count,
                                         double epsilon, std::uint64_t seed) {
  const std::size_t head = model.head_index(spec.game_id);
  Rng rng(derive_seed(seed, "sample-explore"));
  std::vector<env::TokenSeq> out;
  out.reserve(count);
  std::size_t episode = 0;
  while (out.size() < count) {
    auto [state, obs] = env::reset(spec, derive_seed(seed, "sample-env", episode++));
    env::TokenSeq tokens = agent::map_tokens(obs.tokens, token_map);
    while (out.size() < count) {
      out.push_back(tokens);
      auto [qa, qo] = model.q_values(tokens, head);
      auto res = env::step(state, spec, agent::select_command(qa.values(), qo.values(), epsilon, rng));
      if (res.done) break;
      tokens = agent::map_tokens(res.observation.tokens, token_map);
    }
  }
  return out;
}

}  // namespace tgpd::analysis
