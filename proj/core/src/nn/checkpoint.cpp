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

#include "tgpd/nn/checkpoint.hpp"

#include "tgpd/common/binary_io.hpp"

namespace tgpd::nn {

const NamedArray* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw(std::string_view(kCheckpointMagic, 4));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    w.str(a.name);
    w.u32(static_cast<std::uint32_t>(a.shape.size()));
    for (auto d : a.shape) w.u32(static_cast<std::uint32_t>(d));
    for (float v : a.values) w.f32(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.vocabulary.size()));
  for (const auto& word : ckpt.vocabulary) w.str(word);
  return w.bytes();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.raw(4) != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError("checkpoint: bad magic bytes");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported format version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 2) throw FormatError("checkpoint: array '" + a.name + "' has bad rank");
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      a.shape.push_back(r.u32());
      n *= a.shape.back();
    }
    if (n * 4 > r.remaining()) throw FormatError("checkpoint: truncated data");
    a.values.resize(n);
    for (auto& v : a.values) v = r.f32();
    ckpt.arrays.push_back(std::move(a));
  }
  const std::uint32_t words = r.u32();
  for (std::uint32_t i = 0; i < words; ++i) ckpt.vocabulary.push_back(r.str());
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace tgpd::nn
