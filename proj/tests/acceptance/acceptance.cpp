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

// End-to-end acceptance run. Trains the teachers, students, baselines and
// transfer agents once and prints one PASS/FAIL line per criterion.
//
//   acceptance --work-dir DIR [--seed N] [--reuse]
//
// --reuse loads teacher checkpoints left in DIR by an earlier run instead of
// retraining them (development only).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "op_cases.hpp"
#include "support.hpp"
#include "tgpd/analysis/heatmap.hpp"
#include "tgpd/analysis/jacobian.hpp"
#include "tgpd/analysis/transfer.hpp"
#include "tgpd/cli/run.hpp"
#include "tgpd/common/binary_io.hpp"
#include "tgpd/distill/store.hpp"
#include "tgpd/distill/student.hpp"

namespace fs = std::filesystem;
using namespace tgpd;
using tgpd::testing::game;

namespace {

// Budgets and thresholds.
constexpr std::size_t kTeacherBudget = 30000;  // env steps per teacher
constexpr std::size_t kDistillUpdates = 3000;
constexpr std::size_t kStoreSamples = 10000;
constexpr double kGenEpsilon = 0.05;
constexpr std::size_t kFinalEpisodes = 160;  // ten sweeps over the 16 starts
constexpr double kEvalEpsilon = 0.05;
constexpr double kGradTolerance = 1e-5;
constexpr double kOracleReturn = 0.98;
constexpr double kMinCompletion = 0.95;
constexpr double kMinReward = 0.90;
constexpr double kBaselineGap = 0.30;
constexpr double kHeatmapRatio = 0.5;
constexpr double kTransferThreshold = 0.90;

using Clock = std::chrono::steady_clock;
const auto kStart = Clock::now();

void progress(const std::string& msg) {
  const double secs = std::chrono::duration<double>(Clock::now() - kStart).count();
  std::fprintf(stderr, "[%7.1fs] %s\n", secs, msg.c_str());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Verdicts {
  std::vector<std::pair<int, bool>> all;

  void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("criterion %d %-26s %s  %s\n", id, name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    all.emplace_back(id, ok);
  }
};

agent::HyperParams teacher_hp() {
  agent::HyperParams hp;  // library defaults
  return hp;
}

agent::HyperParams student_hp(std::size_t d1) {
  agent::HyperParams hp;
  hp.linear1 = d1;
  hp.lr = distill::kDefaultStudentLr;
  hp.eval_interval = 250;  // updates
  return hp;
}

agent::EvalResult final_eval(const agent::Net& net, const env::GameSpec& spec, std::uint64_t seed,
                             std::size_t head = 0, std::span<const env::TokenId> map = {}) {
  return agent::evaluate(net, spec, kFinalEpisodes, derive_seed(seed, "acceptance-eval"), kEvalEpsilon, head, map);
}

// ---------------------------------------------------------------------------

void gradient_integrity(Verdicts& v) {
  double worst = 0.0;
  std::size_t cases = 0;
  for (const auto& c : tgpd::testing::op_cases()) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      Rng rng(derive_seed(seed, c.name));
      worst = std::max(worst, tgpd::testing::gradcheck(c.inputs(rng), c.graph, seed));
      ++cases;
    }
  }
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto c = tgpd::testing::make_net_case(seed);
    worst = std::max(worst, tgpd::testing::gradcheck_params(
                                c.net, [&](nn::Tape<double>& tape) { return tgpd::testing::td_loss(c, tape); }));
    ++cases;
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = tgpd::testing::make_net_case(seed);
    Rng rng(seed);
    const auto& head = c.net.config().heads[0];
    const auto ta = nn::softmax_t(tgpd::testing::random_tensor({c.seqs.size(), head.actions}, rng), 0.3);
    const auto to = nn::softmax_t(tgpd::testing::random_tensor({c.seqs.size(), head.objects}, rng), 0.3);
    worst = std::max(worst, tgpd::testing::gradcheck_params(c.net, [&](nn::Tape<double>& tape) {
      auto q = c.net.forward(tape, std::span<const env::TokenSeq>(c.seqs), 0);
      return nn::add(nn::kl_loss(ta, q.q_action), nn::kl_loss(to, q.q_object));
    }));
    ++cases;
  }
  v.report(1, "gradient-integrity", worst <= kGradTolerance && cases >= 50,
           std::to_string(cases) + " cases, worst relative error " + fmt("%.3g", worst) + " (limit 1e-5)");
}

void environment_oracle(Verdicts& v) {
  const auto spec = game(1);
  const double best = env::optimal_average_return(spec);
  agent::Policy bfs = [&](const env::EnvState& s, const env::Observation&, Rng&) {
    return env::optimal_command(spec, s.room, s.quest);
  };
  const auto ev = agent::evaluate_policy(spec, bfs, spec.num_starts(), 0);
  const bool ok = best == kOracleReturn && std::abs(ev.avg_reward - kOracleReturn) <= 1e-12 &&
                  ev.quest_completion == 1.0;
  v.report(2, "environment-oracle", ok,
           "optimal average " + fmt("%.17g", best) + ", scripted policy (" + fmt("%.6f", ev.avg_reward) + ", " +
               fmt("%.6f", ev.quest_completion) + ")");
}

void determinism(Verdicts& v, const fs::path& dir,
                 const std::map<std::string, agent::Net>& teachers,
                 const std::vector<env::GameSpec>& specs) {
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };
  fs::remove_all(dir);
  const std::vector<std::string> small = {"--budget", "3000", "--hidden", "20", "--d1", "20", "--eval-interval",
                                          "1000", "--seed", "11"};
  auto teach = std::vector<std::string>{"train-teacher", "--game", "game1", "--out", (dir / "a").string()};
  teach.insert(teach.end(), small.begin(), small.end());
  bool ok = cli(teach) == cli::kExitOk;
  ok = ok && cli({"train-teacher", "--config", (dir / "a" / "manifest.json").string(), "--out",
                  (dir / "b").string()}) == cli::kExitOk;
  const bool logs_equal = ok && read_file(dir / "a" / "log.csv") == read_file(dir / "b" / "log.csv");
  const bool ckpt_equal = ok && read_file(dir / "a" / "checkpoint.tgpd") == read_file(dir / "b" / "checkpoint.tgpd");

  ok = ok && cli({"gen-data", "--game", "game1", "--checkpoint", (dir / "a").string(), "--samples", "500",
                  "--out", (dir / "ga").string()}) == cli::kExitOk;
  ok = ok && cli({"gen-data", "--config", (dir / "ga" / "manifest.json").string(), "--out",
                  (dir / "gb").string()}) == cli::kExitOk;
  const bool stores_equal = ok && read_file(dir / "ga" / "game1.tgds") == read_file(dir / "gb" / "game1.tgds");

  bool roundtrip = true;
  for (const auto& spec : specs) {
    const auto& net = teachers.at(spec.game_id);
    const auto ckpt = net.to_checkpoint(spec.vocab.words());
    const auto path = dir / (spec.game_id + ".tgpd");
    nn::save_checkpoint(ckpt, path);
    const auto loaded = agent::Net::from_checkpoint(nn::load_checkpoint(path));
    roundtrip = roundtrip && loaded.same_parameters(net) &&
                nn::encode_checkpoint(loaded.to_checkpoint(spec.vocab.words())) == nn::encode_checkpoint(ckpt);
  }
  v.report(9, "determinism-persistence", ok && logs_equal && ckpt_equal && stores_equal && roundtrip,
           std::string("manifest re-run log ") + (logs_equal ? "identical" : "differs") + ", checkpoint " +
               (ckpt_equal ? "identical" : "differs") + ", store " + (stores_equal ? "identical" : "differs") +
               ", checkpoint round trips " + (roundtrip ? "bitwise" : "NOT bitwise"));
}

// ---------------------------------------------------------------------------

double area_under(const agent::TrainingLog& log, const std::string& gid) {
  const auto rows = log.for_game(gid);
  double area = 0.0;
  double prev_step = 0.0, prev = 0.0;
  for (const auto& r : rows) {
    area += 0.5 * (prev + r.quest_completion) * (static_cast<double>(r.step) - prev_step);
    prev_step = static_cast<double>(r.step);
    prev = r.quest_completion;
  }
  return prev_step > 0 ? area / prev_step : 0.0;
}

std::optional<std::size_t> steps_to(const agent::TrainingLog& log, const std::string& gid, double threshold) {
  for (const auto& r : log.for_game(gid)) {
    if (r.quest_completion >= threshold) return r.step;
  }
  return std::nullopt;
}

std::string steps_string(std::optional<std::size_t> s) { return s ? std::to_string(*s) : "never"; }

std::vector<const env::GameSpec*> pick(const std::vector<env::GameSpec>& specs, std::initializer_list<int> ids) {
  std::vector<const env::GameSpec*> out;
  for (int id : ids) out.push_back(&specs.at(static_cast<std::size_t>(id - 1)));
  return out;
}

struct Student {
  distill::StudentNet net;
  distill::DistillResult result;
};

Student distill_student(const distill::TeacherStore& stores, const std::vector<const env::GameSpec*>& games,
                        std::size_t d1, std::uint64_t seed, const fs::path& out) {
  const auto hp = student_hp(d1);
  auto net = distill::make_student(games, hp, seed);
  auto result = distill::train_student(stores, net, games, hp, seed, {kDistillUpdates, 1});
  fs::create_directories(out);
  result.log.write_csv(out / "log.csv");
  nn::save_checkpoint(net.net.to_checkpoint(net.vocab.vocab().words()), out / "checkpoint.tgpd");
  return {std::move(net), std::move(result)};
}

struct HeatDiffs {
  std::map<std::string, double> by_pair;
};

HeatDiffs heatmap_diffs(const distill::StudentNet& student, const env::GameSpec& a, const env::GameSpec& b,
                        std::uint64_t seed, const fs::path& out) {
  HeatDiffs diffs;
  fs::create_directories(out);
  const auto net = student.net.cast<double>();
  std::map<std::string, std::vector<env::TokenSeq>> states;
  for (const auto* g : {&a, &b}) {
    states[g->game_id] = analysis::sample_states(student.net, *g, student.vocab.token_map(g->game_id), 100, 0.05,
                                                 derive_seed(seed, "analysis", g == &a ? 0 : 1));
  }
  for (const auto& pair :
       {analysis::LayerPair::relu_vs_mean_pool(), analysis::LayerPair::action_vs_relu(),
        analysis::LayerPair::object_vs_relu()}) {
    std::vector<analysis::HeatMap> maps;
    for (const auto* g : {&a, &b}) {
      maps.push_back(analysis::to_heatmap(analysis::mean_jacobian(net, g->game_id, states[g->game_id], pair)));
      analysis::write_heatmap(maps.back(), out / (g->game_id + "_" + pair.name() + ".pgm"),
                              out / (g->game_id + "_" + pair.name() + ".csv"));
    }
    diffs.by_pair[pair.name()] = analysis::heatmap_mean_abs_diff(maps[0], maps[1]);
  }
  return diffs;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = "acceptance-runs";
  std::uint64_t seed = 0;
  bool reuse = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--seed" && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else if (a == "--reuse") {
      reuse = true;
    } else {
      std::fprintf(stderr, "usage: acceptance [--work-dir DIR] [--seed N] [--reuse]\n");
      return 2;
    }
  }
  fs::create_directories(work);
  Verdicts v;

  progress("gradient checks");
  gradient_integrity(v);
  environment_oracle(v);

  std::vector<env::GameSpec> specs;
  for (int g = 1; g <= 5; ++g) specs.push_back(game(g));

  // Teachers for all five games.
  std::map<std::string, agent::Net> teachers;
  std::string teacher_detail;
  bool teachers_ok = true;
  for (const auto& spec : specs) {
    const auto dir = work / "teachers" / spec.game_id;
    const auto ckpt_path = dir / "checkpoint.tgpd";
    if (reuse && fs::exists(ckpt_path)) {
      teachers.emplace(spec.game_id, agent::Net::from_checkpoint(nn::load_checkpoint(ckpt_path)));
      progress("reused teacher " + spec.game_id);
    } else {
      progress("training teacher " + spec.game_id);
      auto res = agent::train_teacher(spec, teacher_hp(), seed, kTeacherBudget);
      fs::create_directories(dir);
      res.log.write_csv(dir / "log.csv");
      nn::save_checkpoint(res.net.to_checkpoint(spec.vocab.words()), ckpt_path);
      teachers.emplace(spec.game_id, std::move(res.net));
    }
    const auto ev = final_eval(teachers.at(spec.game_id), spec, seed);
    teachers_ok = teachers_ok && ev.quest_completion >= kMinCompletion && ev.avg_reward >= kMinReward;
    teacher_detail += spec.game_id + " (" + fmt("%.3f", ev.quest_completion) + ", " + fmt("%.3f", ev.avg_reward) + ") ";
    progress(spec.game_id + " teacher completion " + fmt("%.3f", ev.quest_completion));
  }
  v.report(3, "teacher-competence", teachers_ok, teacher_detail + "need >= 0.95 completion, >= 0.90 reward");

  determinism(v, work / "determinism", teachers, specs);

  // Teacher stores.
  progress("generating teacher data");
  distill::TeacherStore stores;
  for (const auto& spec : specs) {
    stores[spec.game_id] = distill::generate_teacher_data(teachers.at(spec.game_id), spec, kStoreSamples, kGenEpsilon,
                                                          derive_seed(seed, "gen-" + spec.game_id));
    distill::save_store(stores[spec.game_id], work / "stores" / (spec.game_id + ".tgds"));
  }

  // Students on games 1, 2, 4 at both linear widths, identical seeds/stores.
  const auto g124 = pick(specs, {1, 2, 4});
  progress("distilling D1=50 student on game1,game2,game4");
  auto s50 = distill_student(stores, g124, 50, seed, work / "students" / "d1_50");
  progress("distilling D1=100 student on game1,game2,game4");
  auto s100 = distill_student(stores, g124, 100, seed, work / "students" / "d1_100");

  {
    bool ok = true;
    std::string detail;
    for (const auto* g : g124) {
      const auto ev = final_eval(s50.net.net, *g, seed, s50.net.head_index(g->game_id),
                                 s50.net.vocab.token_map(g->game_id));
      ok = ok && ev.quest_completion >= kMinCompletion && ev.avg_reward >= kMinReward;
      detail += g->game_id + " (" + fmt("%.3f", ev.quest_completion) + ", " + fmt("%.3f", ev.avg_reward) + ") ";
    }
    v.report(4, "distillation-headline", ok, "D1=50 student " + detail);
  }
  {
    const double a50 = area_under(s50.result.log, "game4");
    const double a100 = area_under(s100.result.log, "game4");
    v.report(5, "capacity-effect", a100 >= a50,
             "normalised completion AUC on game4: D1=100 " + fmt("%.4f", a100) + " vs D1=50 " + fmt("%.4f", a50));
  }

  // Baseline gap on games 1, 2, 3.
  const auto g123 = pick(specs, {1, 2, 3});
  progress("distilling student on game1,game2,game3");
  auto s123 = distill_student(stores, g123, 50, seed, work / "students" / "g123");
  progress("training multi-task baseline on game1,game2,game3");
  auto baseline = distill::train_multitask_lstm_dqn(g123, teacher_hp(), seed, kTeacherBudget);
  fs::create_directories(work / "multitask");
  baseline.log.write_csv(work / "multitask" / "log.csv");
  {
    double student_mean = 0.0, baseline_mean = 0.0;
    for (std::size_t i = 0; i < g123.size(); ++i) {
      const auto* g = g123[i];
      student_mean += final_eval(s123.net.net, *g, seed, s123.net.head_index(g->game_id),
                                 s123.net.vocab.token_map(g->game_id))
                          .quest_completion;
      baseline_mean +=
          final_eval(baseline.net, *g, seed, i, baseline.vocab.token_map(g->game_id)).quest_completion;
    }
    student_mean /= static_cast<double>(g123.size());
    baseline_mean /= static_cast<double>(g123.size());
    v.report(6, "baseline-gap", student_mean - baseline_mean >= kBaselineGap,
             "mean completion student " + fmt("%.3f", student_mean) + " vs multi-task " + fmt("%.3f", baseline_mean) +
                 " (gap " + fmt("%.3f", student_mean - baseline_mean) + ", need >= 0.30)");
  }

  // Heat maps on the D1=50 student, games 1 and 4.
  progress("heat maps");
  try {
    const auto d = heatmap_diffs(s50.net, specs[0], specs[3], seed, work / "heatmaps" / "d1_50");
    const auto d100 = heatmap_diffs(s100.net, specs[0], specs[3], seed, work / "heatmaps" / "d1_100");
    const double relu = d.by_pair.at("relu-mean_pool");
    const double act = d.by_pair.at("action-relu");
    const double obj = d.by_pair.at("object-relu");
    v.report(7, "heatmap-structure", relu <= kHeatmapRatio * act && relu <= kHeatmapRatio * obj,
             "D1=50 diffs relu-mean_pool " + fmt("%.2f", relu) + ", action-relu " + fmt("%.2f", act) +
                 ", object-relu " + fmt("%.2f", obj) + "; D1=100 " + fmt("%.2f", d100.by_pair.at("relu-mean_pool")) +
                 "/" + fmt("%.2f", d100.by_pair.at("action-relu")) + "/" + fmt("%.2f", d100.by_pair.at("object-relu")));
  } catch (const std::exception& e) {
    // A collapsed student has no active units to map.
    v.report(7, "heatmap-structure", false, std::string("heat maps failed: ") + e.what());
  }

  // Transfer to game 5.
  {
    const auto& target = specs[4];
    auto source = [&](const std::string& label, const agent::Net& net, const std::vector<std::string>& words) {
      return analysis::embedding_source(label, net.to_checkpoint(words));
    };
    const auto t1 = source("game1", teachers.at("game1"), specs[0].vocab.words());
    const auto t2 = source("game2", teachers.at("game2"), specs[1].vocab.words());
    const auto t3 = source("game3", teachers.at("game3"), specs[2].vocab.words());
    const auto st = source("student", s123.net.net, s123.net.vocab.vocab().words());
    const std::vector<std::pair<analysis::TransferMode, std::vector<analysis::EmbeddingSource>>> agents = {
        {analysis::TransferMode::kA1, {t1}}, {analysis::TransferMode::kA2, {t2}},
        {analysis::TransferMode::kA3, {t3}}, {analysis::TransferMode::kA4, {st}},
        {analysis::TransferMode::kA5, {}},   {analysis::TransferMode::kA6, {t1, t2, t3}}};
    std::map<std::string, std::optional<std::size_t>> reach;
    fs::create_directories(work / "transfer");
    for (const auto& [mode, sources] : agents) {
      const auto name = analysis::to_string(mode);
      progress("transfer agent " + name + " on game5");
      const auto hp = teacher_hp();
      agent::Net net(agent::teacher_config(target, hp), derive_seed(seed, "init"));
      analysis::transfer_initialize({sources, &target, mode, true, seed}, net);
      const auto log = agent::train_agent(net, target, hp, seed, kTeacherBudget);
      log.write_csv(work / "transfer" / (name + ".csv"));
      reach[name] = steps_to(log, target.game_id, kTransferThreshold);
    }
    constexpr auto kNever = std::numeric_limits<std::size_t>::max();
    auto at = [&](const std::string& n) { return reach[n].value_or(kNever); };
    const std::size_t best_single = std::min({at("A1"), at("A2"), at("A3")});
    const bool ok = reach["A4"].has_value() && at("A4") < at("A5") && at("A4") <= best_single;
    std::string detail = "env steps to 0.90 completion:";
    for (const auto& [n, s] : reach) detail += " " + n + "=" + steps_string(s);
    v.report(8, "transfer-ordering", ok, detail);
  }

  std::sort(v.all.begin(), v.all.end());
  std::size_t failed = 0;
  for (const auto& [id, ok] : v.all) failed += ok ? 0 : 1;
  std::printf("%zu of %zu criteria passed\n", v.all.size() - failed, v.all.size());
  progress("done");
  return failed == 0 ? 0 : 1;
}
