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

#include "tgpd/distill/store.hpp"

#include "tgpd/common/binary_io.hpp"

namespace tgpd::distill {

std::string encode_store(const GameStore& store) {
  ByteWriter w;
  w.raw(std::string_view(kStoreMagic, 4));
  w.u32(kStoreVersion);
  w.str(store.game_id);
  w.u32(static_cast<std::uint32_t>(store.num_actions));
  w.u32(static_cast<std::uint32_t>(store.num_objects));
  w.u32(static_cast<std::uint32_t>(store.samples.size()));
  for (const auto& s : store.samples) {
    if (s.q_action.size() != store.num_actions || s.q_object.size() != store.num_objects) {
      throw ShapeError("teacher sample does not match the store's head sizes");
    }
    w.u32(static_cast<std::uint32_t>(s.tokens.size()));
    for (auto t : s.tokens) w.u32(t);
    for (float v : s.q_action) w.f32(v);
    for (float v : s.q_object) w.f32(v);
  }
  return w.bytes();
}

GameStore decode_store(std::string_view bytes) {
  ByteReader r(bytes, "teacher store");
  if (r.raw(4) != std::string_view(kStoreMagic, 4)) throw FormatError("teacher store: bad magic bytes");
  const std::uint32_t version = r.u32();
  if (version != kStoreVersion) {
    throw FormatError("teacher store: unsupported format version " + std::to_string(version));
  }
  GameStore store;
  store.game_id = r.str();
  store.num_actions = r.u32();
  store.num_objects = r.u32();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    DistillSample s;
    s.game_id = store.game_id;
    const std::uint32_t n = r.u32();
    if (static_cast<std::size_t>(n) * 4 > r.remaining()) throw FormatError("teacher store: truncated data");
    s.tokens.resize(n);
    for (auto& t : s.tokens) t = r.u32();
    s.q_action.resize(store.num_actions);
    for (auto& v : s.q_action) v = r.f32();
    s.q_object.resize(store.num_objects);
    for (auto& v : s.q_object) v = r.f32();
    store.samples.push_back(std::move(s));
  }
  if (!r.at_end()) throw FormatError("teacher store: trailing bytes");
  return store;
}

void save_store(const GameStore& store, const std::filesystem::path& path) {
  write_file_atomic(path, encode_store(store));
}

GameStore load_store(const std::filesystem::path& path) { return decode_store(read_file(path)); }

GameStore generate_teacher_data(const agent::Net& teacher, const env::GameSpec& game,
                                std::size_t n_samples, double epsilon_gen, std::uint64_t seed,
                                int episode_cap) {
  env::GameSpec spec = game;
  spec.rules.episode_cap = episode_cap;
  const std::size_t head = teacher.head_index(spec.game_id);
  GameStore store{spec.game_id, spec.num_actions(), spec.num_objects(), {}};
  store.samples.reserve(n_samples);
  Rng rng(derive_seed(seed, "gen-policy"));
  for (std::size_t episode = 0; store.samples.size() < n_samples; ++episode) {
    auto [state, obs] = env::reset(spec, derive_seed(seed, "gen-episode", episode));
    bool done = false;
    while (!done && store.samples.size() < n_samples) {
      auto [qa, qo] = teacher.q_values(obs.tokens, head);
      store.samples.push_back({obs.tokens,
                               {qa.values().begin(), qa.values().end()},
                               {qo.values().begin(), qo.values().end()},
                               spec.game_id});
      const auto cmd = agent::select_command(qa.values(), qo.values(), epsilon_gen, rng);
      auto res = env::step(state, spec, cmd);
      done = res.done;
      obs = std::move(res.observation);
    }
  }
  return store;
}

}  // namespace tgpd::distill
