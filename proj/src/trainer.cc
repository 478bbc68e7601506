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

#include "affectod/trainer.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "affectod/corpus.h"
#include "affectod/errors.h"
#include "affectod/metrics.h"
#include "affectod/outcome.h"
#include "affectod/state.h"

namespace affectod {
namespace {

constexpr std::uint64_t kPersonaStream = 1, kUserStream = 2, kErcStream = 3, kPolicyStream = 4,
                        kNlgStream = 5;

std::string checkpoint_name(int dialogues) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%06d", dialogues);
  return buf;
}

Json goal_config_to_json(const GoalConfig& g) {
  return Json{{"multi_domain_probability", g.multi_domain_probability},
              {"unsatisfiable_probability", g.unsatisfiable_probability},
              {"booking_probability", g.booking_probability},
              {"min_constraints", g.min_constraints},
              {"max_constraints", g.max_constraints},
              {"min_requests", g.min_requests},
              {"max_requests", g.max_requests}};
}

GoalConfig goal_config_from_json(const Json& j) {
  GoalConfig d, g;
  g.multi_domain_probability = j.value("multi_domain_probability", d.multi_domain_probability);
  g.unsatisfiable_probability = j.value("unsatisfiable_probability", d.unsatisfiable_probability);
  g.booking_probability = j.value("booking_probability", d.booking_probability);
  g.min_constraints = j.value("min_constraints", d.min_constraints);
  g.max_constraints = j.value("max_constraints", d.max_constraints);
  g.min_requests = j.value("min_requests", d.min_requests);
  g.max_requests = j.value("max_requests", d.max_requests);
  return g;
}

}  // namespace

AblationFlags AblationFlags::parse(std::string_view spec) {
  if (spec == "all") return {true, true, true};
  if (spec == "none") return {false, false, false};
  AblationFlags f{false, false, false};
  std::string s(spec);
  std::stringstream in(s);
  std::string part;
  bool any = false;
  while (std::getline(in, part, ',')) {
    if (part == "state") f.emotion_in_state = true;
    else if (part == "conduct") f.conduct_output = true;
    else if (part == "reward") f.emotion_reward = true;
    else throw ConfigError("unknown ablation switch '" + part + "' (expected state, conduct, reward, all or none)");
    any = true;
  }
  if (!any) throw ConfigError("empty ablation spec");
  return f;
}

std::string AblationFlags::to_string() const {
  if (emotion_in_state && conduct_output && emotion_reward) return "all";
  if (all_off()) return "none";
  std::vector<std::string> on;
  if (emotion_in_state) on.push_back("state");
  if (conduct_output) on.push_back("conduct");
  if (emotion_reward) on.push_back("reward");
  std::string s;
  for (std::size_t i = 0; i < on.size(); ++i) s += (i ? "," : "") + on[i];
  return s;
}

EpisodeResult run_episode(const DialoguePolicy& policy, const Modules& m, const UserGoal& goal,
                          std::uint64_t seed) {
  EpisodeResult res;
  EpisodeRecord& rec = res.record;
  rec.goal = goal;
  rec.seed = seed;
  const Ontology& ont = *m.ontology;
  Rng persona_rng(derive_seed(seed, kPersonaStream)), erc_rng(derive_seed(seed, kErcStream)),
      policy_rng(derive_seed(seed, kPolicyStream)), nlg_rng(derive_seed(seed, kNlgStream));
  RewardConfig rc = m.reward;
  rc.max_turns = m.max_turns;
  if (!m.ablation.emotion_reward) rc.beta = 0.0;

  std::vector<UserEmotion> replies;  // perceived emotion answering each decision
  try {
    const UserSimulator sim(ont, m.rules, m.lexicon);
    const Persona persona = sample_persona(m.personas, persona_rng);
    UserState us = init_session(goal, persona, derive_seed(seed, kUserStream));
    DialogueState state = DialogueState::initial(ont);

    auto perceive = [&](const UserTurn& ut) {
      state = track(state, ut.acts, ont);
      const ErcResult er =
          recognize_emotion(ut.utterance, state.history, state, m.lexicon, m.noise, m.erc, erc_rng);
      state.perceived_emotion = er.label;
      state.perceived_confidence = er.confidence;
      push_history(state, ut.utterance);
      return er;
    };

    UserTurn ut = sim.start(us);
    for (int i = 0; i < m.max_turns; ++i) {
      Turn turn;
      turn.index = i;
      turn.user_utterance = ut.utterance;
      turn.user_acts = ut.acts;
      turn.true_emotion = ut.emotion;
      const ErcResult er = perceive(ut);
      turn.perceived_emotion = er.label;
      turn.perceived_confidence = er.confidence;
      if (i > 0) replies.push_back(er.label);
      if (ut.closing) {
        rec.turns.push_back(std::move(turn));
        break;
      }

      Decision d = policy.decide(state, policy_rng);
      if (d.features.empty()) d.features = featurize(state, ont, m.ablation.emotion_in_state);
      const Conduct conduct = m.ablation.conduct_output ? d.conduct : Conduct::kNeutral;
      turn.system_acts = d.acts;
      turn.conduct = conduct;
      turn.system_utterance = realize(d.acts, conduct, m.bank, nlg_rng);
      apply_system_acts(state, d.acts, ont);
      push_history(state, turn.system_utterance);
      rec.turns.push_back(std::move(turn));
      res.trajectory.steps.push_back({std::move(d.features), std::move(d.tokens), d.log_prob, d.value, 0.0});

      ut = sim.respond(us, d.acts, conduct);
      if (i + 1 == m.max_turns) replies.push_back(perceive(ut).label);
    }
  } catch (const std::exception& e) {
    rec.aborted = true;
    rec.abort_reason = e.what();
    res.trajectory.aborted = true;
    return res;
  }

  const Verdict v = judge_outcome(goal, rec.turns, ont);
  rec.outcome.success = v.success;
  rec.outcome.inform = v.inform;
  double ret = 0.0;
  std::size_t k = 0;
  for (auto& turn : rec.turns) {
    if (!turn.has_system_response()) continue;
    const bool terminal = k + 1 == res.trajectory.steps.size();
    const TurnOutcome o = !terminal ? TurnOutcome::kOngoing
                          : v.success ? TurnOutcome::kSuccess
                                      : TurnOutcome::kFailure;
    const RewardBreakdown rb = total_reward(o, replies[k], rc);
    turn.reward = rb;
    res.trajectory.steps[k].reward = rb.total();
    ret += rb.total();
    ++k;
  }
  rec.outcome.total_return = ret;
  return res;
}

void TrainConfig::validate() const {
  if (total_dialogues < 1 || eval_interval < 1 || total_dialogues % eval_interval != 0)
    throw ConfigError("eval_interval must divide total_dialogues");
  if (max_turns < 2) throw ConfigError("max_turns must be >= 2");
  if (eval_dialogues < 1) throw ConfigError("eval_dialogues must be >= 1");
  if (batch_episodes < 1) throw ConfigError("batch_episodes must be >= 1");
  if (bc_dialogues < 0 || bc_noise < 0.0 || bc_noise > 1.0) throw ConfigError("bad warm-start settings");
  if (erc_flip < 0.0 || erc_flip > 1.0) throw ConfigError("erc_flip must be in [0,1]");
  reward.validate();
  policy.validate();
  ppo.validate();
}

TrainConfig TrainConfig::full_scale() {
  TrainConfig c;
  c.total_dialogues = 15000;
  c.eval_interval = 1000;
  c.eval_dialogues = 500;
  return c;
}

void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"total_dialogues", c.total_dialogues},
           {"eval_interval", c.eval_interval},
           {"eval_dialogues", c.eval_dialogues},
           {"max_turns", c.max_turns},
           {"batch_episodes", c.batch_episodes},
           {"workers", c.workers},
           {"max_abort_fraction", c.max_abort_fraction},
           {"reward", c.reward},
           {"ablation", c.ablation.to_string()},
           {"policy", c.policy},
           {"ppo", c.ppo},
           {"bc_dialogues", c.bc_dialogues},
           {"bc_noise", c.bc_noise},
           {"bc", c.bc},
           {"goals", goal_config_to_json(c.goals)},
           {"erc_flip", c.erc_flip}};
  const std::pair<const char*, const std::string*> files[] = {{"rules_file", &c.rules_file},
                                                              {"personas_file", &c.personas_file},
                                                              {"lexicon_file", &c.lexicon_file},
                                                              {"templates_file", &c.templates_file},
                                                              {"bc_corpus", &c.bc_corpus}};
  for (const auto& [key, value] : files)
    if (!value->empty()) j[key] = *value;
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  try {
    c.total_dialogues = j.value("total_dialogues", c.total_dialogues);
    c.eval_interval = j.value("eval_interval", c.eval_interval);
    c.eval_dialogues = j.value("eval_dialogues", c.eval_dialogues);
    c.max_turns = j.value("max_turns", c.max_turns);
    c.batch_episodes = j.value("batch_episodes", c.batch_episodes);
    c.workers = j.value("workers", c.workers);
    c.max_abort_fraction = j.value("max_abort_fraction", c.max_abort_fraction);
    if (j.contains("reward")) c.reward = j["reward"].get<RewardConfig>();
    if (j.contains("ablation")) c.ablation = AblationFlags::parse(j["ablation"].get<std::string>());
    if (j.contains("policy")) c.policy = j["policy"].get<PolicyConfig>();
    if (j.contains("ppo")) c.ppo = j["ppo"].get<PpoConfig>();
    c.bc_dialogues = j.value("bc_dialogues", c.bc_dialogues);
    c.bc_noise = j.value("bc_noise", c.bc_noise);
    if (j.contains("bc")) c.bc = j["bc"].get<BcConfig>();
    if (j.contains("goals")) c.goals = goal_config_from_json(j["goals"]);
    c.erc_flip = j.value("erc_flip", c.erc_flip);
    c.rules_file = j.value("rules_file", c.rules_file);
    c.personas_file = j.value("personas_file", c.personas_file);
    c.lexicon_file = j.value("lexicon_file", c.lexicon_file);
    c.templates_file = j.value("templates_file", c.templates_file);
    c.bc_corpus = j.value("bc_corpus", c.bc_corpus);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed training config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  TrainConfig c = train_config_from_json(read_json_file(path));
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* f : {&c.rules_file, &c.personas_file, &c.lexicon_file, &c.templates_file,
                         &c.bc_corpus})
    if (!f->empty() && std::filesystem::path(*f).is_relative()) *f = (base / *f).string();
  return c;
}

Modules make_modules(const TrainConfig& config, const Ontology& ontology) {
  Modules m;
  m.ontology = &ontology;
  m.noise = NoiseChannel::uniform_flip(config.erc_flip);
  m.reward = config.reward;
  m.reward.max_turns = config.max_turns;
  m.ablation = config.ablation;
  m.max_turns = config.max_turns;
  if (!config.rules_file.empty()) m.rules = rule_table_from_json(read_json_file(config.rules_file));
  if (!config.personas_file.empty())
    m.personas = persona_distribution_from_json(read_json_file(config.personas_file));
  if (!config.lexicon_file.empty())
    m.lexicon = cue_lexicon_from_json(read_json_file(config.lexicon_file));
  if (!config.templates_file.empty())
    m.bank = template_bank_from_json(read_json_file(config.templates_file));
  return m;
}

PolicyModel make_policy(const TrainConfig& config, const Ontology& ontology, std::uint64_t seed) {
  PolicyConfig pc = config.policy;
  pc.emotion_in_state = config.ablation.emotion_in_state;
  pc.conduct_output = config.ablation.conduct_output;
  return PolicyModel(feature_dim(ontology), Vocabulary(ontology), pc, seed);
}

std::vector<EpisodeResult> collect(const DialoguePolicy& policy, const Modules& modules,
                                   std::uint64_t base_seed, std::size_t first, std::size_t n,
                                   const GoalConfig& goals, ExecutionMode mode) {
  std::vector<EpisodeResult> out(n);
  auto one = [&](std::size_t i) {
    const std::size_t idx = first + i;
    Rng goal_rng(derive_seed(base_seed, 2 * idx));
    const UserGoal goal = sample_goal(*modules.ontology, goal_rng, goals);
    out[i] = run_episode(policy, modules, goal, derive_seed(base_seed, 2 * idx + 1));
  };
  const auto nn = static_cast<long>(n);
  if (mode == ExecutionMode::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < nn; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < nn; ++i) one(static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<EpisodeRecord> evaluate_policy(const PolicyModel& model, const Modules& modules,
                                           std::uint64_t seed, int dialogues,
                                           const GoalConfig& goals, ExecutionMode mode) {
  const NeuralPolicy policy(model, *modules.ontology, DecodeMode::kGreedy);
  auto results = collect(policy, modules, derive_seed(seed, 0xE7A1), 0,
                         static_cast<std::size_t>(dialogues), goals, mode);
  std::vector<EpisodeRecord> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(r.record));
  return out;
}

std::vector<BcExample> operator_corpus(const PolicyModel& model, const Modules& modules,
                                       std::uint64_t seed, int dialogues, double noise,
                                       const GoalConfig& goals, ExecutionMode mode) {
  RulePolicyConfig rc;
  rc.noise = noise;
  rc.conduct_marginal = kCorpusConductMarginal;
  rc.emit_conduct = model.config().conduct_output;
  const RulePolicy op(*modules.ontology, rc);
  auto results = collect(op, modules, seed, 0, static_cast<std::size_t>(dialogues), goals, mode);
  std::vector<BcExample> corpus;
  for (auto& r : results) {
    if (r.trajectory.aborted) continue;
    for (auto& s : r.trajectory.steps) corpus.push_back({std::move(s.features), std::move(s.tokens)});
  }
  return corpus;
}

Json curves_to_json(const TrainConfig& config, std::uint64_t seed, const TrainResult& result) {
  Json j;
  j["seed"] = seed;
  j["ablation"] = config.ablation.to_string();
  j["config_hash"] = result.best_model.config_hash();
  j["schedule"] = {{"total_dialogues", config.total_dialogues},
                   {"eval_interval", config.eval_interval},
                   {"eval_dialogues", config.eval_dialogues}};
  j["bc_losses"] = result.bc_losses;
  j["points"] = Json::array();
  for (const auto& p : result.curve)
    j["points"].push_back({{"dialogues", p.dialogues},
                           {"success_rate", p.success_rate},
                           {"inform_rate", p.inform_rate},
                           {"mean_sentiment", p.mean_sentiment},
                           {"mean_return", p.mean_return},
                           {"hallucination_rate", p.hallucination_rate},
                           {"checkpoint", p.checkpoint}});
  if (!result.curve.empty())
    j["best"] = {{"index", result.best},
                 {"checkpoint", result.curve[result.best].checkpoint},
                 {"mean_return", result.curve[result.best].mean_return}};
  j["aborted_training_episodes"] = result.aborted;
  return j;
}

TrainResult train(const TrainConfig& config, std::uint64_t seed, const Ontology& ontology,
                  const std::string& out_dir, ExecutionMode mode) {
  config.validate();
#ifdef _OPENMP
  if (config.workers > 0) omp_set_num_threads(config.workers);
#endif
  namespace fs = std::filesystem;
  const Modules modules = make_modules(config, ontology);
  PolicyModel model = make_policy(config, ontology, derive_seed(seed, 100));
  TrainResult result;

  std::ofstream episodes_out;
  if (!out_dir.empty()) {
    fs::create_directories(fs::path(out_dir) / "checkpoints");
    episodes_out.open(fs::path(out_dir) / "episodes.jsonl");
  }

  if (!config.bc_corpus.empty()) {
    const auto annotated = load_corpus(config.bc_corpus);
    const auto corpus = behavior_cloning_examples(annotated, model, ontology);
    BcConfig bc = config.bc;
    bc.seed = derive_seed(seed, bc.seed);
    result.bc_losses = clone_behavior(model, corpus, bc, mode);
  } else if (config.bc_dialogues > 0) {
    const auto corpus = operator_corpus(model, modules, derive_seed(seed, 200), config.bc_dialogues,
                                        config.bc_noise, config.goals, mode);
    BcConfig bc = config.bc;
    bc.seed = derive_seed(seed, bc.seed);
    result.bc_losses = clone_behavior(model, corpus, bc, mode);
  }

  Adam optimizer(model.num_params(), config.ppo.adam);
  const std::uint64_t rollout_seed = derive_seed(seed, 400);
  const std::string hash = model.config_hash();
  int done = 0;
  int next_eval = config.eval_interval;
  double best_return = -1e300;
  while (done < config.total_dialogues) {
    const int n = std::min(config.batch_episodes, next_eval - done);
    const NeuralPolicy policy(model, ontology, DecodeMode::kSample);
    auto batch = collect(policy, modules, rollout_seed, static_cast<std::size_t>(done),
                         static_cast<std::size_t>(n), config.goals, mode);
    std::vector<Trajectory> trajectories;
    for (auto& r : batch) {
      if (r.trajectory.aborted) ++result.aborted;
      r.record.config_hash = hash;
      r.record.checkpoint_id = "train";
      if (episodes_out.is_open()) episodes_out << Json(r.record).dump() << "\n";
      trajectories.push_back(std::move(r.trajectory));
    }
    auto samples = build_samples(trajectories, config.ppo);
    if (config.ppo.normalize_advantages) normalize_advantages(samples);
    try {
      ppo_update(model, optimizer, samples, config.ppo, mode);
    } catch (const NumericalError& e) {
      if (!out_dir.empty()) save_checkpoint((fs::path(out_dir) / "diagnostic_checkpoint.json").string(), model);
      throw NumericalError(std::string("training halted after ") + std::to_string(done) +
                           " dialogues: " + e.what());
    }
    done += n;

    if (done == next_eval) {
      auto eval = evaluate_policy(model, modules, seed, config.eval_dialogues, config.goals, mode);
      EvalPoint p;
      p.dialogues = done;
      p.checkpoint = checkpoint_name(done);
      for (auto& e : eval) {
        e.config_hash = hash;
        e.checkpoint_id = p.checkpoint;
      }
      const MetricReport rep = build_report(eval, ontology);
      p.success_rate = rep.success_rate;
      p.inform_rate = rep.inform_rate;
      p.mean_sentiment = rep.mean_sentiment;
      p.mean_return = rep.mean_return;
      p.hallucination_rate = rep.hallucination_rate;
      if (!out_dir.empty())
        save_checkpoint((fs::path(out_dir) / "checkpoints" / (p.checkpoint + ".json")).string(), model,
                        Json{{"dialogues", done}, {"seed", seed}, {"ablation", config.ablation.to_string()}});
      if (p.mean_return > best_return) {
        best_return = p.mean_return;
        result.best = result.curve.size();
        result.best_model = model;
        result.best_eval_episodes = std::move(eval);
      }
      result.curve.push_back(p);
      next_eval += config.eval_interval;
    }
  }

  if (static_cast<double>(result.aborted) >
      config.max_abort_fraction * static_cast<double>(config.total_dialogues))
    throw std::runtime_error("unhealthy run: " + std::to_string(result.aborted) +
                             " aborted training episodes");

  if (!out_dir.empty()) {
    std::ofstream(fs::path(out_dir) / "curves.json") << curves_to_json(config, seed, result).dump(2) << "\n";
    save_checkpoint((fs::path(out_dir) / "checkpoints" / "best.json").string(), result.best_model,
                    Json{{"checkpoint", result.curve[result.best].checkpoint},
                         {"seed", seed},
                         {"ablation", config.ablation.to_string()}});
    write_episodes_jsonl((fs::path(out_dir) / "eval_episodes.jsonl").string(), result.best_eval_episodes);
  }
  return result;
}

}  // namespace affectod
