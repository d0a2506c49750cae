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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgpd/agent/dqn.hpp"

namespace tgpd::cli {

using Json = nlohmann::ordered_json;

// One configurable field of an experiment. A null default marks a required
// field. Flags are spelled with dashes, JSON keys with underscores.
struct Key {
  std::string name;
  Json fallback;
  std::string help;
};

struct Experiment {
  std::string kind;
  std::string summary;
  std::vector<Key> keys;
};

const std::vector<Experiment>& experiments();
const Experiment& find_experiment(const std::string& kind);

std::string flag_name(const std::string& key);

// Parses a flag's text according to the type of the key's default.
Json parse_value(const Key& key, const std::string& text);

// Resolved configuration: defaults, then the config file (plain object or a
// run manifest), then explicit flags. Unknown keys and missing required
// fields raise ConfigError.
class Config {
 public:
  Config(const Experiment& exp, const Json& file_values, const Json& flag_values);

  const std::string& kind() const noexcept { return kind_; }
  const Json& values() const noexcept { return values_; }

  std::string str(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::size_t size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  bool has(const std::string& key) const { return values_.contains(key); }

  // Hyperparameters assembled from whichever fields this experiment has.
  agent::HyperParams hyper_params() const;
  std::filesystem::path out_dir() const;

 private:
  const Json& at(const std::string& key) const;

  std::string kind_;
  Json values_;
};

// Config file contents; a manifest contributes its "config" block.
Json read_config_file(const std::filesystem::path& path, const std::string& kind);

// Game document path for a name or path: existing paths are used as given,
// bare names resolve to <assets>/<name>.json, where <assets> is $TGPD_ASSETS
// or the directory the build was configured with.
std::filesystem::path resolve_game(const std::string& name_or_path);

// A directory argument stands for the checkpoint inside it.
std::filesystem::path resolve_checkpoint(const std::string& path);

}  // namespace tgpd::cli
