// Copyright 2026 The Affectod Authors.
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

#include <CLI11.hpp>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "affectod/corpus.h"
#include "affectod/errors.h"
#include "affectod/metrics.h"
#include "affectod/outcome.h"
#include "affectod/trainer.h"
#include "affectod/trial.h"
#include "affectod/trial_http.h"

// After the Eigen users: resolv.h defines _res.
#include <httplib.h>

namespace fs = std::filesystem;
using namespace affectod;

namespace {

Ontology ontology_from(const std::string& path) {
  return path.empty() ? desk_ontology() : load_ontology(path);
}

void write_json(const std::string& path, const Json& j) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<int> parse_buckets(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
  return out;
}

// Annotated turns of one speaker with at least two labels.
KappaResult corpus_kappa(std::span<const AnnotatedDialogue> corpus, Speaker who) {
  std::vector<std::vector<std::size_t>> items;
  for (const auto& d : corpus)
    for (const auto& t : d.turns)
      if (t.speaker == who && t.annotations.size() >= 2) items.push_back(t.annotations);
  return fleiss_kappa(items, who == Speaker::kSystem ? kNumConducts : kNumEmotions);
}

std::string curve_table(const TrainResult& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "dialogues  success  inform  sentiment  return    halluc  checkpoint\n";
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    const auto& p = r.curve[i];
    os << std::setw(9) << p.dialogues << "  " << std::setw(7) << p.success_rate << "  " << std::setw(6)
       << p.inform_rate << "  " << std::setw(9) << p.mean_sentiment << "  " << std::setw(8)
       << p.mean_return << "  " << std::setw(6) << p.hallucination_rate << "  " << p.checkpoint
       << (i == r.best ? " *" : "") << "\n";
  }
  return os.str();
}

std::vector<double> per_episode(std::span<const EpisodeRecord> eps, const std::string& metric) {
  std::vector<double> v;
  for (const auto& e : eps) {
    if (e.aborted) continue;
    if (metric == "success") v.push_back(e.outcome.success ? 1.0 : 0.0);
    else if (metric == "inform") v.push_back(e.outcome.inform ? 1.0 : 0.0);
    else if (metric == "sentiment") v.push_back(episode_sentiment(e));
    else v.push_back(e.outcome.total_return);
  }
  return v;
}

int run_train(const std::string& config_path, bool full_scale, std::uint64_t seed,
              const std::string& ablation, const std::string& out, bool serial,
              const std::string& ontology_path) {
  TrainConfig config = config_path.empty() ? (full_scale ? TrainConfig::full_scale() : TrainConfig{})
                                           : load_train_config(config_path);
  if (!ablation.empty()) config.ablation = AblationFlags::parse(ablation);
  config.validate();
  const Ontology ontology = ontology_from(ontology_path);
  std::cerr << "training " << config.total_dialogues << " dialogues, ablation "
            << config.ablation.to_string() << ", seed " << seed << "\n";
  const TrainResult r =
      train(config, seed, ontology, out, serial ? ExecutionMode::kSerial : ExecutionMode::kParallel);
  std::cout << curve_table(r);
  std::cout << "best checkpoint: " << r.curve[r.best].checkpoint << " (mean return "
            << r.curve[r.best].mean_return << ")\n";
  std::cout << "outputs in " << out << "\n";
  return 0;
}

int run_simulate(const std::string& checkpoint, const std::string& policy_name,
                 const std::string& config_path, const std::string& ablation, int dialogues,
                 std::uint64_t seed, const std::string& out, const std::string& ontology_path) {
  TrainConfig config = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
  const Ontology ontology = ontology_from(ontology_path);
  std::vector<EpisodeRecord> episodes;
  if (policy_name == "neural") {
    if (checkpoint.empty()) throw ConfigError("--checkpoint is required for the neural policy");
    Json extra;
    const PolicyModel model = load_checkpoint(checkpoint, Vocabulary(ontology), &extra);
    if (!ablation.empty()) config.ablation = AblationFlags::parse(ablation);
    else if (extra.contains("ablation")) config.ablation = AblationFlags::parse(extra["ablation"].get<std::string>());
    const Modules modules = make_modules(config, ontology);
    episodes = evaluate_policy(model, modules, seed, dialogues, config.goals, ExecutionMode::kParallel);
  } else {
    if (!ablation.empty()) config.ablation = AblationFlags::parse(ablation);
    const Modules modules = make_modules(config, ontology);
    std::unique_ptr<DialoguePolicy> policy;
    if (policy_name == "rule") policy = std::make_unique<RulePolicy>(ontology);
    else if (policy_name == "bye") policy = std::make_unique<ByePolicy>();
    else throw ConfigError("unknown policy " + policy_name);
    for (auto& r : collect(*policy, modules, derive_seed(seed, 0xE7A1), 0,
                           static_cast<std::size_t>(dialogues), config.goals, ExecutionMode::kParallel))
      episodes.push_back(std::move(r.record));
  }
  write_episodes_jsonl(out, episodes);
  std::cout << "wrote " << episodes.size() << " episodes to " << out << "\n";
  return 0;
}

int run_evaluate(const std::string& episodes_path, const std::string& report_path,
                 const std::string& against, const std::string& label,
                 const std::string& ontology_path) {
  const Ontology ontology = ontology_from(ontology_path);
  const auto episodes = read_episodes_jsonl(episodes_path);
  const MetricReport rep = build_report(episodes, ontology);
  Json j = report_to_json(rep);
  std::cout << report_table(rep, label);
  if (!against.empty()) {
    const auto other = read_episodes_jsonl(against);
    const MetricReport orep = build_report(other, ontology);
    std::cout << report_table(orep, against);
    Json cmp = Json::object();
    for (const std::string m : {"success", "inform", "sentiment", "return"}) {
      const auto a = per_episode(episodes, m);
      const auto b = per_episode(other, m);
      if (a.size() != b.size()) throw MetricError("paired comparison needs equally many episodes");
      const SignificanceResult s = paired_bootstrap(a, b);
      cmp[m] = {{"method", s.method}, {"delta", s.delta}, {"p_value", s.p_value},
                {"significant", s.significant}, {"resamples", s.resamples}};
      std::cout << std::fixed << std::setprecision(4) << m << ": delta " << s.delta << ", p "
                << s.p_value << (s.significant ? " (significant)" : "") << "\n";
    }
    j["against"] = {{"episodes", against}, {"report", report_to_json(orep)}, {"paired", cmp}};
  }
  if (!report_path.empty()) write_json(report_path, j);
  return 0;
}

int run_corpus_stats(const std::string& input, bool by_turn, const std::string& buckets,
                     bool exclude_auto, const std::string& json_out, const std::string& bc_out,
                     const std::string& ontology_path) {
  auto corpus = load_corpus(input);
  const AggregationReport agg = aggregate(corpus);
  const ConductDistribution d = conduct_distribution(corpus, by_turn, parse_buckets(buckets), !exclude_auto);
  Json j = distribution_to_json(d);
  j["dialogues"] = corpus.size();
  j["aggregation"] = {{"finalized", agg.finalized},
                      {"escalated", agg.escalated},
                      {"manual", agg.manual},
                      {"auto_labeled", agg.auto_labeled}};
  std::cout << distribution_table(d);
  std::cout << "aggregation: " << agg.finalized << " finalized, " << agg.escalated << " escalated, "
            << agg.manual << " manual, " << agg.auto_labeled << " auto-labelled\n";
  for (const Speaker who : {Speaker::kSystem, Speaker::kUser}) {
    const char* name = who == Speaker::kSystem ? "system" : "user";
    try {
      const KappaResult k = corpus_kappa(corpus, who);
      j["kappa"][name] = {{"kappa", k.degenerate ? Json(nullptr) : Json(k.kappa)},
                          {"items", k.items},
                          {"raters", k.raters},
                          {"subsampled", k.subsampled}};
      std::cout << name << " fleiss kappa: "
                << (k.degenerate ? std::string("undefined") : std::to_string(k.kappa)) << " over "
                << k.items << " items\n";
    } catch (const AnnotationError&) {
      j["kappa"][name] = nullptr;
    }
  }
  if (!json_out.empty()) write_json(json_out, j);
  if (!bc_out.empty()) {
    const Ontology ontology = ontology_from(ontology_path);
    const PolicyModel model = make_policy(TrainConfig{}, ontology, 1);
    const auto examples = behavior_cloning_examples(corpus, model, ontology);
    std::ofstream out(bc_out);
    for (const auto& e : examples) out << Json{{"features", e.features}, {"tokens", e.tokens}}.dump() << "\n";
    std::cout << "wrote " << examples.size() << " behaviour-cloning examples to " << bc_out << "\n";
  }
  return 0;
}

int run_make_corpus(int dialogues, std::uint64_t seed, double noise, const std::string& output,
                    const std::string& ontology_path) {
  const Ontology ontology = ontology_from(ontology_path);
  TrainConfig config;
  const Modules modules = make_modules(config, ontology);
  RulePolicyConfig rc;
  rc.noise = noise;
  rc.conduct_marginal = kCorpusConductMarginal;
  const RulePolicy op(ontology, rc);
  std::vector<AnnotatedDialogue> corpus;
  std::size_t i = 0;
  for (auto& r : collect(op, modules, seed, 0, static_cast<std::size_t>(dialogues), config.goals,
                         ExecutionMode::kParallel)) {
    if (r.record.aborted) continue;
    char id[32];
    std::snprintf(id, sizeof id, "sim%05zu", i++);
    corpus.push_back(to_annotated(r.record, id));
  }
  save_corpus(output, corpus);
  std::cout << "wrote " << corpus.size() << " dialogues to " << output << "\n";
  return 0;
}

int run_dump_defaults(const std::string& dir) {
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return (fs::path(dir) / name).string(); };
  write_json(p("ontology.json"), ontology_to_json(desk_ontology()));
  write_json(p("rules.json"), rule_table_to_json(RuleTable::defaults()));
  write_json(p("personas.json"), persona_distribution_to_json(PersonaDistribution::defaults()));
  write_json(p("lexicon.json"), cue_lexicon_to_json(CueLexicon::defaults()));
  write_json(p("templates.json"), template_bank_to_json(TemplateBank::defaults()));
  write_json(p("noise.json"), noise_channel_to_json(NoiseChannel::uniform_flip(TrainConfig{}.erc_flip)));
  write_json(p("train_config.json"), Json(TrainConfig{}));
  write_json(p("train_config_full_scale.json"), Json(TrainConfig::full_scale()));
  std::cout << "defaults written to " << dir << "\n";
  return 0;
}

httplib::Server* g_server = nullptr;

int run_serve(const std::string& checkpoint_dir, int port, const std::string& host,
              const std::string& store, const HttpOptions& http, int max_turns, std::uint64_t seed,
              const std::string& ontology_path) {
  const Ontology ontology = ontology_from(ontology_path);
  TrialConfig tc;
  tc.max_turns = max_turns;
  tc.seed = seed;
  TrialService service(ontology, checkpoint_dir, store, tc);
  const auto cps = service.checkpoints();
  if (cps.empty()) throw ConfigError("no checkpoints found in " + checkpoint_dir);
  httplib::Server server;
  mount_trial_routes(server, service, http);
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cout << "serving " << cps.size() << " checkpoints and " << service.session_count()
            << " stored sessions on http://" << host << ":" << port << "\n"
            << std::flush;
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"affectod: emotion-aware task-oriented dialogue toolkit"};
  app.require_subcommand(1);
  std::string ontology_path;
  app.add_option("--ontology", ontology_path, "ontology JSON (default: built-in desk ontology)");

  auto* train_cmd = app.add_subcommand("train", "warm start and PPO training with periodic evaluation");
  std::string config_path, ablation, out_dir;
  std::uint64_t seed = 1;
  bool serial = false, full_scale = false;
  train_cmd->add_option("--config", config_path, "training config JSON");
  train_cmd->add_flag("--full-scale", full_scale, "15000 dialogues, eval every 1000 on 500");
  train_cmd->add_option("--seed", seed, "run seed");
  train_cmd->add_option("--ablation", ablation, "all, none, or a comma list of state,conduct,reward");
  train_cmd->add_option("--out", out_dir, "output directory")->required();
  train_cmd->add_flag("--serial", serial, "use the serial reference kernels");

  auto* sim_cmd = app.add_subcommand("simulate", "play greedy evaluation dialogues and log episodes");
  std::string checkpoint, policy_name = "neural", episodes_out;
  int dialogues = 300;
  sim_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint JSON");
  sim_cmd->add_option("--policy", policy_name, "neural, rule or bye")->check(CLI::IsMember({"neural", "rule", "bye"}));
  sim_cmd->add_option("--config", config_path, "training config JSON for the environment");
  sim_cmd->add_option("--ablation", ablation, "override the checkpoint's ablation flags");
  sim_cmd->add_option("--dialogues", dialogues, "number of dialogues");
  sim_cmd->add_option("--seed", seed, "evaluation seed");
  sim_cmd->add_option("--out", episodes_out, "episodes JSONL")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "metric report over logged episodes");
  std::string episodes_in, report_out, against, label = "system";
  eval_cmd->add_option("--episodes", episodes_in, "episodes JSONL")->required();
  eval_cmd->add_option("--report", report_out, "report JSON");
  eval_cmd->add_option("--against", against, "second episodes JSONL for a paired comparison");
  eval_cmd->add_option("--label", label, "row label in the text table");

  auto* stats_cmd = app.add_subcommand("corpus-stats", "conduct distribution, aggregation and agreement");
  std::string input, buckets = "0,3,6,9", json_out, bc_out;
  bool by_turn = false, exclude_auto = false;
  stats_cmd->add_option("--input", input, "annotated corpus JSON")->required();
  stats_cmd->add_flag("--by-turn", by_turn, "per turn-position histograms");
  stats_cmd->add_option("--buckets", buckets, "bucket lower bounds, comma separated");
  stats_cmd->add_flag("--exclude-auto", exclude_auto, "drop auto-labelled machine-generated turns");
  stats_cmd->add_option("--json", json_out, "write the statistics as JSON");
  stats_cmd->add_option("--export-bc", bc_out, "write behaviour-cloning examples as JSONL");

  auto* make_cmd = app.add_subcommand("make-corpus", "synthetic annotated corpus from operator dialogues");
  double noise = 0.3;
  std::string corpus_out;
  make_cmd->add_option("--dialogues", dialogues, "number of dialogues");
  make_cmd->add_option("--seed", seed, "seed");
  make_cmd->add_option("--noise", noise, "operator act noise");
  make_cmd->add_option("--output", corpus_out, "corpus JSON")->required();

  auto* serve_cmd = app.add_subcommand("serve", "human trial HTTP service");
  std::string host = "127.0.0.1", store = "trial_store";
  int port = 8080, max_turns = 20;
  HttpOptions http;
  serve_cmd->add_option("--checkpoint", checkpoint, "checkpoint directory (a train --out directory works)")->required();
  serve_cmd->add_option("--port", port, "port");
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--store", store, "session store directory");
  serve_cmd->add_option("--token", http.token, "shared trial token");
  serve_cmd->add_option("--static", http.static_dir, "UI assets directory served at /");
  serve_cmd->add_option("--cors-origin", http.cors_origin, "allowed UI origin");
  serve_cmd->add_option("--max-turns", max_turns, "turn cap per session");
  serve_cmd->add_option("--seed", seed, "seed for sessions created without one");

  auto* dump_cmd = app.add_subcommand("dump-defaults", "write the built-in tables and configs as JSON");
  std::string dump_dir;
  dump_cmd->add_option("--output-dir", dump_dir, "directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train_cmd) return run_train(config_path, full_scale, seed, ablation, out_dir, serial, ontology_path);
    if (*sim_cmd)
      return run_simulate(checkpoint, policy_name, config_path, ablation, dialogues, seed, episodes_out,
                          ontology_path);
    if (*eval_cmd) return run_evaluate(episodes_in, report_out, against, label, ontology_path);
    if (*stats_cmd)
      return run_corpus_stats(input, by_turn, buckets, exclude_auto, json_out, bc_out, ontology_path);
    if (*make_cmd) return run_make_corpus(dialogues, seed, noise, corpus_out, ontology_path);
    if (*serve_cmd) return run_serve(checkpoint, port, host, store, http, max_turns, seed, ontology_path);
    if (*dump_cmd) return run_dump_defaults(dump_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
