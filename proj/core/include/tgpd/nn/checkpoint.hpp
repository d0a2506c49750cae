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
#include <filesystem>
#include <string>
#include <vector>

#include "tgpd/nn/tensor.hpp"

namespace tgpd::nn {

inline constexpr char kCheckpointMagic[4] = {'T', 'G', 'P', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

// Parameter arrays plus the vocabulary (words in index order) they embed.
struct Checkpoint {
  std::vector<NamedArray> arrays;
  std::vector<std::string> vocabulary;

  const NamedArray* find(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
// Throws FormatError on bad magic, unsupported version, or truncation.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
NamedArray to_named_array(const Parameter<T>& p) {
  NamedArray a{p.name, p.value.shape(), {}};
  a.values.reserve(p.value.size());
  for (T v : p.value.values()) a.values.push_back(static_cast<float>(v));
  return a;
}

}  // namespace tgpd::nn
