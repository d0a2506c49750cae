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
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tgpd/agent/dqn.hpp"
#include "tgpd/common/random.hpp"
#include "tgpd/nn/lstm.hpp"

namespace tgpd::testing {

inline std::filesystem::path asset(const std::string& name) {
  return std::filesystem::path(TGPD_ASSETS_DIR) / name;
}

inline env::GameSpec game(int n) { return env::load_game_spec(asset("game" + std::to_string(n) + ".json")); }

inline nn::Tensor<double> random_tensor(nn::Shape shape, Rng& rng, double scale = 1.0) {
  nn::Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = (2.0 * uniform_real(rng) - 1.0) * scale;
  return t;
}

// ||a - b|| / (||a|| + ||b||), zero when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

using Graph = std::function<nn::Var<double>(nn::Tape<double>&, const std::vector<nn::Var<double>>&)>;

// Central-difference check of every input of `f`. The output is reduced
// with fixed random weights so every component is exercised. Returns the
// worst per-input relative error.
inline double gradcheck(const std::vector<nn::Tensor<double>>& inputs, const Graph& f, std::uint64_t seed,
                        double h = 1e-5) {
  Rng rng(seed);
  nn::Tensor<double> weights;
  auto eval = [&](const std::vector<nn::Tensor<double>>& xs) {
    nn::Tape<double> tape;
    tape.set_grad_enabled(false);
    std::vector<nn::Var<double>> vars;
    for (const auto& x : xs) vars.push_back(tape.input(x));
    auto out = f(tape, vars);
    double s = 0.0;
    for (std::size_t i = 0; i < out.value().size(); ++i) s += weights[i] * out.value()[i];
    return s;
  };

  nn::Tape<double> tape;
  std::vector<nn::Var<double>> vars;
  for (const auto& x : inputs) vars.push_back(tape.input(x));
  auto out = f(tape, vars);
  weights = random_tensor(out.shape(), rng);
  tape.backward(out, weights);

  double worst = 0.0;
  auto xs = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<double> analytic(inputs[k].size()), numeric(inputs[k].size());
    const auto& g = tape.grad(vars[k].id());
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      analytic[i] = g[i];
      const double x0 = xs[k][i];
      xs[k][i] = x0 + h;
      const double up = eval(xs);
      xs[k][i] = x0 - h;
      const double down = eval(xs);
      xs[k][i] = x0;
      numeric[i] = (up - down) / (2.0 * h);
    }
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return worst;
}

// Same check over every parameter of a network for a scalar loss.
inline double gradcheck_params(agent::LstmDqnNet<double>& net,
                               const std::function<nn::Var<double>(nn::Tape<double>&)>& loss, double h = 1e-5) {
  for (auto* p : net.parameters()) p->zero_grad();
  {
    nn::Tape<double> tape;
    tape.backward(loss(tape));
  }
  auto value = [&] {
    nn::Tape<double> tape;
    tape.set_grad_enabled(false);
    return loss(tape).value()[0];
  };
  double worst = 0.0;
  for (auto* p : net.parameters()) {
    std::vector<double> analytic(p->value.size()), numeric(p->value.size());
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      analytic[i] = p->grad[i];
      const double x0 = p->value[i];
      p->value[i] = x0 + h;
      const double up = value();
      p->value[i] = x0 - h;
      const double down = value();
      p->value[i] = x0;
      numeric[i] = (up - down) / (2.0 * h);
    }
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return worst;
}

// Small random network and batch for full forward+loss checks.
struct NetCase {
  agent::LstmDqnNet<double> net;
  std::vector<env::TokenSeq> seqs;
  std::vector<std::size_t> actions;
  std::vector<std::size_t> objects;
  std::vector<double> targets;
};

inline NetCase make_net_case(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t vocab = 6 + uniform_index(rng, 5);
  agent::NetConfig cfg{vocab, 3 + uniform_index(rng, 3), 3 + uniform_index(rng, 4), 3 + uniform_index(rng, 4),
                       {{"g", 2 + uniform_index(rng, 3), 2 + uniform_index(rng, 4)}}};
  NetCase c{agent::LstmDqnNet<double>(cfg, seed), {}, {}, {}, {}};
  const std::size_t batch = 1 + uniform_index(rng, 4);
  for (std::size_t b = 0; b < batch; ++b) {
    env::TokenSeq s(1 + uniform_index(rng, 6));
    for (auto& t : s) t = static_cast<env::TokenId>(uniform_index(rng, vocab));
    c.seqs.push_back(std::move(s));
    c.actions.push_back(uniform_index(rng, cfg.heads[0].actions));
    c.objects.push_back(uniform_index(rng, cfg.heads[0].objects));
    c.targets.push_back(2.0 * uniform_real(rng) - 1.0);
  }
  return c;
}

inline nn::Var<double> td_loss(NetCase& c, nn::Tape<double>& tape) {
  auto q = c.net.forward(tape, std::span<const env::TokenSeq>(c.seqs), 0);
  const std::span<const double> ys(c.targets);
  return nn::add(nn::squared_td_loss(q.q_action, std::span<const std::size_t>(c.actions), ys),
                 nn::squared_td_loss(q.q_object, std::span<const std::size_t>(c.objects), ys));
}

}  // namespace tgpd::testing
