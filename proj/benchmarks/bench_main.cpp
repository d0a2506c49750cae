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

#include <benchmark/benchmark.h>

#include <filesystem>

#include "tgpd/agent/dqn.hpp"
#include "tgpd/env/environment.hpp"

namespace {

using namespace tgpd;

const env::GameSpec& bench_game() {
  static const env::GameSpec spec =
      env::load_game_spec(std::filesystem::path(TGPD_ASSETS_DIR) / "game1.json");
  return spec;
}

std::vector<env::TokenSeq> batch_of(std::size_t n) {
  std::vector<env::TokenSeq> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(env::reset(bench_game(), i).second.tokens);
  return out;
}

agent::HyperParams params_for(std::size_t hidden) {
  agent::HyperParams hp;
  hp.hidden = hidden;
  hp.linear1 = hidden;
  return hp;
}

void BM_EnvStep(benchmark::State& state) {
  const auto& spec = bench_game();
  auto [s, obs] = env::reset(spec, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    auto res = env::step(s, spec, env::CommandIndex{i % 5, (i / 5) % 8});
    ++i;
    if (res.done) std::tie(s, obs) = env::reset(spec, i);
    benchmark::DoNotOptimize(res.reward);
  }
}
BENCHMARK(BM_EnvStep);

void BM_Inference(benchmark::State& state) {
  const agent::Net net(agent::teacher_config(bench_game(), params_for(state.range(0))), 1);
  const auto seqs = batch_of(1);
  for (auto _ : state) benchmark::DoNotOptimize(net.q_values(seqs[0]));
}
BENCHMARK(BM_Inference)->Arg(50)->Arg(100);

void BM_ForwardBackward(benchmark::State& state) {
  agent::Net net(agent::teacher_config(bench_game(), params_for(state.range(0))), 1);
  const auto seqs = batch_of(32);
  std::vector<std::size_t> idx(32, 0);
  std::vector<float> ys(32, 0.5f);
  for (auto _ : state) {
    nn::Tape<float> tape;
    auto q = net.forward(tape, std::span<const env::TokenSeq>(seqs));
    auto loss = nn::add(nn::squared_td_loss(q.q_action, std::span<const std::size_t>(idx), std::span<const float>(ys)),
                        nn::squared_td_loss(q.q_object, std::span<const std::size_t>(idx), std::span<const float>(ys)));
    tape.backward(loss);
    for (auto* p : net.parameters()) p->zero_grad();
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto& spec = bench_game();
  const auto hp = params_for(state.range(0));
  agent::Net net(agent::teacher_config(spec, hp), 1);
  const agent::Net target = net;
  agent::ReplayBuffer buf(1000);
  Rng rng(2);
  auto [s, obs] = env::reset(spec, 0);
  for (std::size_t i = 0; i < 1000; ++i) {
    const env::CommandIndex c{uniform_index(rng, 5), uniform_index(rng, 8)};
    auto res = env::step(s, spec, c);
    buf.push({obs.tokens, c, res.reward, res.observation.tokens, res.done});
    obs = res.observation;
    if (res.done) std::tie(s, obs) = env::reset(spec, i + 1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent::train_step(net, target, buf, hp, rng));
}
BENCHMARK(BM_TrainStep)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
