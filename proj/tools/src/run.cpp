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

#include "tgpd/cli/run.hpp"

#include <chrono>
#include <ctime>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "config.hpp"
#include "tgpd/analysis/embeddings.hpp"
#include "tgpd/analysis/heatmap.hpp"
#include "tgpd/analysis/jacobian.hpp"
#include "tgpd/analysis/transfer.hpp"
#include "tgpd/common/binary_io.hpp"
#include "tgpd/distill/store.hpp"
#include "tgpd/distill/student.hpp"

#ifndef TGPD_VERSION
#define TGPD_VERSION "0.0.0"
#endif

namespace tgpd::cli {
namespace {

namespace fs = std::filesystem;

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// What a run leaves behind, merged into its manifest.
struct Outcome {
  Json checkpoints = Json::array();
  Json outputs = Json::array();
  Json metrics = Json::object();
};

Json last_rows(const agent::TrainingLog& log) {
  std::map<std::string, agent::LogRow> last;
  for (const auto& r : log.rows) last[r.game_id] = r;
  Json out = Json::object();
  for (const auto& [gid, r] : last) {
    out[gid] = {{"step", r.step}, {"avg_reward", r.avg_reward}, {"quest_completion", r.quest_completion}};
  }
  return out;
}

std::vector<env::GameSpec> load_games(const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("no games given");
  std::vector<env::GameSpec> specs;
  for (const auto& n : names) specs.push_back(env::load_game_spec(resolve_game(n)));
  return specs;
}

std::vector<const env::GameSpec*> pointers(const std::vector<env::GameSpec>& specs) {
  std::vector<const env::GameSpec*> out;
  for (const auto& s : specs) out.push_back(&s);
  return out;
}

void write_log(const agent::TrainingLog& log, const fs::path& dir, Outcome& oc) {
  log.write_csv(dir / "log.csv");
  oc.outputs.push_back((dir / "log.csv").string());
}

void write_checkpoint(const agent::Net& net, std::vector<std::string> vocab, const fs::path& dir, Outcome& oc) {
  nn::save_checkpoint(net.to_checkpoint(std::move(vocab)), dir / "checkpoint.tgpd");
  oc.checkpoints.push_back((dir / "checkpoint.tgpd").string());
}

Outcome train_teacher_cmd(const Config& cfg, const fs::path& dir) {
  const auto spec = env::load_game_spec(resolve_game(cfg.str("game")));
  auto res = agent::train_teacher(spec, cfg.hyper_params(), cfg.u64("seed"), cfg.size("budget"));
  Outcome oc;
  write_checkpoint(res.net, spec.vocab.words(), dir, oc);
  write_log(res.log, dir, oc);
  oc.metrics = last_rows(res.log);
  return oc;
}

Outcome gen_data_cmd(const Config& cfg, const fs::path& dir) {
  const auto spec = env::load_game_spec(resolve_game(cfg.str("game")));
  const auto ckpt = nn::load_checkpoint(resolve_checkpoint(cfg.str("checkpoint")));
  if (ckpt.vocabulary != spec.vocab.words()) {
    throw ArchitectureError("checkpoint vocabulary does not match game '" + spec.game_id + "'");
  }
  const auto teacher = agent::Net::from_checkpoint(ckpt);
  teacher.head_index(spec.game_id);
  auto store = distill::generate_teacher_data(teacher, spec, cfg.size("samples"), cfg.real("eps_gen"),
                                              derive_seed(cfg.u64("seed"), "gen-" + spec.game_id));
  Outcome oc;
  const fs::path path = dir / (spec.game_id + ".tgds");
  distill::save_store(store, path);
  oc.outputs.push_back(path.string());
  oc.metrics = {{"samples", store.samples.size()}};
  return oc;
}

Outcome distill_cmd(const Config& cfg, const fs::path& dir) {
  const auto specs = load_games(cfg.list("games"));
  const auto ptrs = pointers(specs);
  const auto store_paths = cfg.list("stores");
  if (store_paths.size() != specs.size()) {
    throw ConfigError("--stores must name one store per game (" + std::to_string(specs.size()) + ")");
  }
  distill::TeacherStore store;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto gs = distill::load_store(store_paths[i]);
    if (gs.game_id != specs[i].game_id) {
      throw ConfigError(store_paths[i] + " holds samples of '" + gs.game_id + "', expected '" +
                        specs[i].game_id + "'");
    }
    store[gs.game_id] = std::move(gs);
  }
  const auto hp = cfg.hyper_params();
  const std::uint64_t seed = cfg.u64("seed");
  auto student = distill::make_student(ptrs, hp, seed);
  auto res = distill::train_student(store, student, ptrs, hp, seed, {cfg.size("budget"), 1});
  Outcome oc;
  write_checkpoint(student.net, student.vocab.vocab().words(), dir, oc);
  write_log(res.log, dir, oc);
  oc.metrics = last_rows(res.log);
  return oc;
}

Outcome multitask_cmd(const Config& cfg, const fs::path& dir) {
  const auto specs = load_games(cfg.list("games"));
  auto res = distill::train_multitask_lstm_dqn(pointers(specs), cfg.hyper_params(), cfg.u64("seed"),
                                               cfg.size("budget"));
  Outcome oc;
  write_checkpoint(res.net, res.vocab.vocab().words(), dir, oc);
  write_log(res.log, dir, oc);
  oc.metrics = last_rows(res.log);
  return oc;
}

// Network plus the token maps that put each game's ids onto its rows.
struct LoadedModel {
  agent::Net net;
  env::Vocabulary vocab;
  distill::UnionVocab maps;
};

LoadedModel load_model(const std::string& path, const std::vector<const env::GameSpec*>& specs) {
  const auto ckpt = nn::load_checkpoint(resolve_checkpoint(path));
  LoadedModel m{agent::Net::from_checkpoint(ckpt), env::Vocabulary(ckpt.vocabulary),
                distill::UnionVocab::from_words(ckpt.vocabulary, specs)};
  for (const auto* s : specs) m.net.head_index(s->game_id);
  return m;
}

Outcome eval_cmd(const Config& cfg, const fs::path&) {
  const auto specs = load_games({cfg.str("game")});
  const auto ptrs = pointers(specs);
  const auto m = load_model(cfg.str("checkpoint"), ptrs);
  const auto& spec = specs[0];
  auto ev = agent::evaluate(m.net, spec, cfg.size("episodes"), derive_seed(cfg.u64("seed"), "eval"),
                            cfg.real("eps"), m.net.head_index(spec.game_id), m.maps.token_map(spec.game_id));
  Outcome oc;
  oc.metrics[spec.game_id] = {{"avg_reward", ev.avg_reward}, {"quest_completion", ev.quest_completion}};
  return oc;
}

Outcome heatmap_cmd(const Config& cfg, const fs::path& dir) {
  const auto specs = load_games(cfg.list("games"));
  const auto ptrs = pointers(specs);
  const auto m = load_model(cfg.str("checkpoint"), ptrs);
  std::vector<analysis::LayerPair> pairs;
  if (cfg.str("pair") == "all") {
    pairs = {analysis::LayerPair::relu_vs_mean_pool(), analysis::LayerPair::action_vs_relu(),
             analysis::LayerPair::object_vs_relu()};
  } else {
    pairs = {analysis::LayerPair::parse(cfg.str("pair"))};
  }
  const std::uint64_t seed = cfg.u64("seed");
  const auto model = m.net.cast<double>();
  Outcome oc;
  std::map<std::string, std::vector<analysis::HeatMap>> maps;
  for (std::size_t g = 0; g < specs.size(); ++g) {
    const auto& spec = specs[g];
    const auto states = analysis::sample_states(m.net, spec, m.maps.token_map(spec.game_id),
                                                cfg.size("states"), cfg.real("eps"),
                                                derive_seed(seed, "analysis", g));
    for (const auto& pair : pairs) {
      auto hm = analysis::to_heatmap(analysis::mean_jacobian(model, spec.game_id, states, pair));
      const std::string stem = spec.game_id + "_" + pair.name();
      analysis::write_heatmap(hm, dir / (stem + ".pgm"), dir / (stem + ".csv"));
      oc.outputs.push_back((dir / (stem + ".pgm")).string());
      oc.outputs.push_back((dir / (stem + ".csv")).string());
      maps[pair.name()].push_back(std::move(hm));
    }
  }
  if (specs.size() >= 2) {
    Json diffs = Json::object();
    for (const auto& [name, list] : maps) diffs[name] = analysis::heatmap_mean_abs_diff(list[0], list[1]);
    oc.metrics["mean_abs_diff"] = {{"games", {specs[0].game_id, specs[1].game_id}}, {"pairs", diffs}};
  }
  return oc;
}

Outcome export_embeddings_cmd(const Config& cfg, const fs::path& dir) {
  const auto specs = load_games(cfg.list("games"));
  const auto ptrs = pointers(specs);
  const auto m = load_model(cfg.str("checkpoint"), ptrs);
  Outcome oc;
  analysis::export_word_embeddings(m.net, m.vocab, ptrs, dir / "embeddings.csv");
  oc.outputs.push_back((dir / "embeddings.csv").string());
  return oc;
}

Outcome transfer_cmd(const Config& cfg, const fs::path& dir) {
  const auto spec = env::load_game_spec(resolve_game(cfg.str("target")));
  const auto hp = cfg.hyper_params();
  const std::uint64_t seed = cfg.u64("seed");
  analysis::TransferPlan plan;
  plan.target = &spec;
  plan.mode = analysis::parse_transfer_mode(cfg.str("mode"));
  plan.freeze = cfg.flag("freeze");
  plan.seed = seed;
  for (const auto& src : cfg.list("source")) {
    plan.sources.push_back(analysis::embedding_source(src, nn::load_checkpoint(resolve_checkpoint(src))));
  }
  agent::Net net(agent::teacher_config(spec, hp), derive_seed(seed, "init"));
  const auto report = analysis::transfer_initialize(plan, net);
  auto log = agent::train_agent(net, spec, hp, seed, cfg.size("budget"));
  Outcome oc;
  write_checkpoint(net, spec.vocab.words(), dir, oc);
  write_log(log, dir, oc);
  oc.metrics = last_rows(log);
  Json copied = Json::object();
  for (const auto& [label, words] : report.copied) copied[label] = words;
  oc.metrics["transfer"] = {{"mode", analysis::to_string(plan.mode)},
                            {"copied_rows", report.copied_rows},
                            {"frozen_rows", report.frozen_rows},
                            {"copied", copied}};
  return oc;
}

using Handler = Outcome (*)(const Config&, const fs::path&);

Handler handler_for(const std::string& kind) {
  static const std::map<std::string, Handler> table = {
      {"train-teacher", train_teacher_cmd}, {"gen-data", gen_data_cmd},
      {"distill", distill_cmd},             {"train-multitask", multitask_cmd},
      {"eval", eval_cmd},                   {"heatmap", heatmap_cmd},
      {"export-embeddings", export_embeddings_cmd}, {"transfer", transfer_cmd}};
  return table.at(kind);
}

int execute(const Config& cfg, std::ostream& out) {
  const fs::path dir = cfg.out_dir();
  fs::create_directories(dir);
  Json manifest;
  manifest["kind"] = cfg.kind();
  manifest["config"] = cfg.values();
  manifest["versions"] = {{"tgpd", TGPD_VERSION},
                          {"checkpoint_format", nn::kCheckpointVersion},
                          {"store_format", distill::kStoreVersion}};
  manifest["started_at"] = timestamp();
  Outcome oc = handler_for(cfg.kind())(cfg, dir);
  manifest["finished_at"] = timestamp();
  manifest["checkpoints"] = oc.checkpoints;
  manifest["outputs"] = oc.outputs;
  manifest["metrics"] = oc.metrics;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  out << oc.metrics.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Policy distillation for text games: teachers, students, baselines and analyses", "tgpd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TGPD_VERSION);

  struct Pending {
    CLI::App* sub;
    const Experiment* exp;
    std::map<std::string, std::string> text;
    std::map<std::string, CLI::Option*> opts;
    std::string config_path;
  };
  std::vector<std::unique_ptr<Pending>> subs;
  for (const auto& exp : experiments()) {
    auto p = std::make_unique<Pending>();
    p->exp = &exp;
    p->sub = app.add_subcommand(exp.kind, exp.summary);
    p->sub->add_option("--config", p->config_path, "JSON config or run manifest; flags take precedence");
    for (const auto& key : exp.keys) {
      std::string help = key.help;
      if (!key.fallback.is_null()) help += " [" + (key.fallback.is_string() ? key.fallback.get<std::string>() : key.fallback.dump()) + "]";
      p->opts[key.name] = p->sub->add_option(flag_name(key.name), p->text[key.name], help);
    }
    subs.push_back(std::move(p));
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (const auto& p : subs) {
    if (!p->sub->parsed()) continue;
    try {
      Json file_values;
      if (!p->config_path.empty()) file_values = read_config_file(p->config_path, p->exp->kind);
      Json flag_values = Json::object();
      for (const auto& key : p->exp->keys) {
        if (p->opts[key.name]->count() > 0) flag_values[key.name] = parse_value(key, p->text[key.name]);
      }
      const Config cfg(*p->exp, file_values, flag_values);
      return execute(cfg, out);
    } catch (const ConfigError& e) {
      err << "tgpd " << p->exp->kind << ": " << e.what() << "\n";
      return kExitConfig;
    } catch (const SpecError& e) {
      err << "tgpd " << p->exp->kind << ": " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      err << "tgpd " << p->exp->kind << ": " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  err << app.help();
  return kExitConfig;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace tgpd::cli
