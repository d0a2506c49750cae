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

#include "config.hpp"

#include <cstdlib>
#include <sstream>

#include "tgpd/common/binary_io.hpp"
#include "tgpd/distill/student.hpp"

#ifndef TGPD_DEFAULT_ASSETS_DIR
#define TGPD_DEFAULT_ASSETS_DIR "assets"
#endif

namespace tgpd::cli {
namespace {

constexpr std::size_t kDefaultDqnBudget = 30000;
constexpr std::size_t kDefaultDistillUpdates = 3000;

std::vector<Key> dqn_keys() {
  const agent::HyperParams hp;
  return {
      {"budget", kDefaultDqnBudget, "environment steps"},
      {"lr", hp.lr, "SGD learning rate"},
      {"gamma", hp.gamma, "discount factor"},
      {"batch", hp.batch_size, "minibatch size"},
      {"sync", hp.target_sync_interval, "parameter updates between target syncs"},
      {"eps_start", hp.epsilon_start, "initial exploration rate"},
      {"eps_end", hp.epsilon_end, "final exploration rate"},
      {"anneal", hp.epsilon_anneal_steps, "annealing steps (0: half the budget)"},
      {"replay", hp.replay_capacity, "replay capacity per game"},
      {"warmup", hp.warmup, "transitions before the first update"},
      {"train_interval", hp.train_interval, "environment steps per update"},
      {"eval_interval", hp.eval_interval, "environment steps between evaluations"},
      {"eval_episodes", hp.eval_episodes, "episodes per evaluation"},
      {"eval_eps", hp.eval_epsilon, "exploration rate during evaluation"},
      {"clip", hp.clip_norm, "global gradient-norm clip"},
      {"d_emb", hp.d_emb, "embedding size"},
      {"hidden", hp.hidden, "LSTM hidden size"},
      {"d1", hp.linear1, "linear layer size"},
      {"episode_cap", hp.episode_cap, "steps per episode"},
  };
}

std::vector<Key> with(std::vector<Key> a, const std::vector<Key>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<Key> common_keys() {
  return {{"seed", 0, "root random seed"}, {"out", "", "output directory (default $TGPD_OUT/<kind>)"}};
}

std::vector<Experiment> build_experiments() {
  const agent::HyperParams hp;
  const Json required;
  std::vector<Experiment> out;
  out.push_back({"train-teacher", "train a single-game LSTM-DQN teacher",
                 with(with({{"game", required, "game document"}}, common_keys()), dqn_keys())});
  out.push_back({"gen-data", "record a teacher's Q-values into a store",
                 with({{"game", required, "game document"},
                       {"checkpoint", required, "teacher checkpoint"},
                       {"samples", 10000, "samples to record"},
                       {"eps_gen", 0.05, "exploration rate while recording"}},
                      common_keys())});
  out.push_back({"distill", "distill teacher stores into a multi-head student",
                 with(with({{"games", required, "comma-separated game documents or names"},
                            {"stores", required, "comma-separated teacher stores, one per game"}},
                           common_keys()),
                      {{"budget", kDefaultDistillUpdates, "minibatch updates"},
                       {"tau", hp.tau, "softmax temperature of the teacher targets"},
                       {"lr", distill::kDefaultStudentLr, "SGD learning rate"},
                       {"batch", hp.batch_size, "minibatch size"},
                       {"clip", hp.clip_norm, "global gradient-norm clip"},
                       {"eval_interval", 250, "updates between evaluations"},
                       {"eval_episodes", hp.eval_episodes, "episodes per evaluation"},
                       {"eval_eps", hp.eval_epsilon, "exploration rate during evaluation"},
                       {"d_emb", hp.d_emb, "embedding size"},
                       {"hidden", hp.hidden, "LSTM hidden size"},
                       {"d1", hp.linear1, "linear layer size"}})});
  out.push_back({"train-multitask", "multi-task LSTM-DQN baseline over several games",
                 with(with({{"games", required, "comma-separated game documents or names"}}, common_keys()),
                      dqn_keys())});
  out.push_back({"eval", "evaluate a checkpoint on one game",
                 with({{"checkpoint", required, "model checkpoint"},
                       {"game", required, "game document"},
                       {"episodes", 160, "evaluation episodes"},
                       {"eps", hp.eval_epsilon, "exploration rate"}},
                      common_keys())});
  out.push_back({"heatmap", "mean-jacobian heat maps per game and layer pair",
                 with({{"checkpoint", required, "model checkpoint"},
                       {"games", required, "comma-separated game documents or names"},
                       {"pair", "all", "relu-mean_pool, action-relu, object-relu or all"},
                       {"states", 100, "sampled states per game"},
                       {"eps", 0.05, "exploration rate while sampling states"}},
                      common_keys())});
  out.push_back({"export-embeddings", "per-word LSTM outputs as CSV",
                 with({{"checkpoint", required, "model checkpoint"},
                       {"games", required, "comma-separated game documents or names"}},
                      common_keys())});
  out.push_back({"transfer", "train an agent whose embeddings start from other models",
                 with(with({{"target", required, "target game document"},
                            {"mode", required, "A1..A6"},
                            {"source", Json::array(), "comma-separated source checkpoints"},
                            {"freeze", true, "keep transferred rows fixed"}},
                           common_keys()),
                      dqn_keys())});
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool is_list_key(const std::string& name) {
  return name == "games" || name == "stores" || name == "source";
}

bool matches_type(const Key& key, const Json& v) {
  const auto& d = key.fallback;
  if (d.is_null() || is_list_key(key.name)) return true;
  if (d.is_boolean()) return v.is_boolean();
  if (d.is_number_float()) return v.is_number();
  if (d.is_number_integer()) return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
  return v.is_string();
}

}  // namespace

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> all = build_experiments();
  return all;
}

const Experiment& find_experiment(const std::string& kind) {
  for (const auto& e : experiments()) {
    if (e.kind == kind) return e;
  }
  throw ConfigError("unknown experiment kind '" + kind + "'");
}

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  for (auto& ch : out) {
    if (ch == '_') ch = '-';
  }
  return out;
}

Json parse_value(const Key& key, const std::string& text) {
  const auto& d = key.fallback;
  try {
    if (is_list_key(key.name)) return split(text);
    if (d.is_boolean()) {
      if (text == "true" || text == "1" || text == "on") return true;
      if (text == "false" || text == "0" || text == "off") return false;
      throw ConfigError(flag_name(key.name) + " expects true or false, got '" + text + "'");
    }
    if (d.is_number_float()) return std::stod(text);
    if (d.is_number_integer()) {
      if (!text.empty() && text[0] == '-') {
        throw ConfigError(flag_name(key.name) + " must be non-negative");
      }
      std::size_t used = 0;
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError(flag_name(key.name) + ": cannot parse '" + text + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError(flag_name(key.name) + ": value '" + text + "' out of range");
  }
  return text;
}

Config::Config(const Experiment& exp, const Json& file_values, const Json& flag_values)
    : kind_(exp.kind), values_(Json::object()) {
  auto known = [&](const std::string& k) {
    for (const auto& key : exp.keys) {
      if (key.name == k) return &key;
    }
    return static_cast<const Key*>(nullptr);
  };
  for (const auto* layer : {&file_values, &flag_values}) {
    if (layer->is_null()) continue;
    if (!layer->is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [k, v] : layer->items()) {
      if (!known(k)) throw ConfigError("unknown configuration key '" + k + "' for " + kind_);
    }
  }
  for (const auto& key : exp.keys) {
    Json v = key.fallback;
    if (file_values.is_object() && file_values.contains(key.name)) v = file_values[key.name];
    if (flag_values.is_object() && flag_values.contains(key.name)) v = flag_values[key.name];
    if (v.is_null()) throw ConfigError(kind_ + " requires " + flag_name(key.name));
    if (is_list_key(key.name) && v.is_string()) v = split(v.get<std::string>());
    const bool type_ok = matches_type(key, v);
    if (!type_ok) throw ConfigError("configuration key '" + key.name + "' has the wrong type");
    values_[key.name] = v;
  }
}

const Json& Config::at(const std::string& key) const {
  if (!values_.contains(key)) throw ConfigError(kind_ + " has no setting '" + key + "'");
  return values_.at(key);
}

std::string Config::str(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> Config::list(const std::string& key) const {
  const auto& v = at(key);
  if (v.is_string()) return split(v.get<std::string>());
  if (!v.is_array()) throw ConfigError("'" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError("'" + key + "' must list strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::uint64_t Config::u64(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double Config::real(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

bool Config::flag(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
  return v.get<bool>();
}

agent::HyperParams Config::hyper_params() const {
  agent::HyperParams hp;
  auto set_size = [&](const char* key, std::size_t& field) {
    if (has(key)) field = size(key);
  };
  auto set_real = [&](const char* key, double& field) {
    if (has(key)) field = real(key);
  };
  set_real("lr", hp.lr);
  set_real("gamma", hp.gamma);
  set_real("tau", hp.tau);
  set_real("eps_start", hp.epsilon_start);
  set_real("eps_end", hp.epsilon_end);
  set_real("eval_eps", hp.eval_epsilon);
  set_real("clip", hp.clip_norm);
  set_size("batch", hp.batch_size);
  set_size("sync", hp.target_sync_interval);
  set_size("anneal", hp.epsilon_anneal_steps);
  set_size("replay", hp.replay_capacity);
  set_size("warmup", hp.warmup);
  set_size("train_interval", hp.train_interval);
  set_size("eval_interval", hp.eval_interval);
  set_size("eval_episodes", hp.eval_episodes);
  set_size("d_emb", hp.d_emb);
  set_size("hidden", hp.hidden);
  set_size("d1", hp.linear1);
  if (has("episode_cap")) hp.episode_cap = static_cast<int>(size("episode_cap"));
  hp.validate();
  return hp;
}

std::filesystem::path Config::out_dir() const {
  const std::string out = str("out");
  if (!out.empty()) return out;
  const char* root = std::getenv("TGPD_OUT");
  return std::filesystem::path(root && *root ? root : "runs") / kind_;
}

Json read_config_file(const std::filesystem::path& path, const std::string& kind) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + ": configuration must be a JSON object");
  if (doc.contains("config")) {
    if (doc.contains("kind") && doc["kind"] != kind) {
      throw ConfigError(path.string() + " describes a '" + doc["kind"].get<std::string>() + "' run, not " + kind);
    }
    return doc["config"];
  }
  if (doc.contains("kind")) {
    if (doc["kind"] != kind) throw ConfigError(path.string() + ": kind does not match " + kind);
    doc.erase("kind");
  }
  return doc;
}

std::filesystem::path resolve_game(const std::string& name_or_path) {
  std::filesystem::path p(name_or_path);
  if (std::filesystem::exists(p)) return p;
  if (p.has_parent_path() || p.has_extension()) return p;  // let the loader report it
  const char* env = std::getenv("TGPD_ASSETS");
  const std::filesystem::path dir = env && *env ? env : TGPD_DEFAULT_ASSETS_DIR;
  return dir / (name_or_path + ".json");
}

std::filesystem::path resolve_checkpoint(const std::string& path) {
  std::filesystem::path p(path);
  if (std::filesystem::is_directory(p)) return p / "checkpoint.tgpd";
  return p;
}

}  // namespace tgpd::cli
