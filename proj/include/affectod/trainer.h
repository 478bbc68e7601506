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

#ifndef AFFECTOD_TRAINER_H_
#define AFFECTOD_TRAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affectod/agents.h"
#include "affectod/episode.h"
#include "affectod/erc.h"
#include "affectod/goal.h"
#include "affectod/model.h"
#include "affectod/nlg.h"
#include "affectod/ontology.h"
#include "affectod/ppo.h"
#include "affectod/reward.h"
#include "affectod/usersim.h"

namespace affectod {

// The three emotion switches. All off is the emotion-free baseline loop.
struct AblationFlags {
  bool emotion_in_state = true;
  bool conduct_output = true;
  bool emotion_reward = true;

  // "all" (every switch on), "none" (every switch off), or a comma list of
  // the switches that stay on: state, conduct, reward.
  static AblationFlags parse(std::string_view spec);
  std::string to_string() const;
  bool all_off() const { return !emotion_in_state && !conduct_output && !emotion_reward; }
  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

// Everything an episode needs besides the policy; read-only during rollouts.
struct Modules {
  const Ontology* ontology = nullptr;
  RuleTable rules = RuleTable::defaults();
  CueLexicon lexicon = CueLexicon::defaults();
  TemplateBank bank = TemplateBank::defaults();
  NoiseChannel noise = NoiseChannel::uniform_flip(0.1);
  ErcConfig erc;
  RewardConfig reward;
  PersonaDistribution personas = PersonaDistribution::defaults();
  AblationFlags ablation;
  int max_turns = 20;
};

struct EpisodeResult {
  EpisodeRecord record;
  Trajectory trajectory;  // one step per system decision
};

// Plays one dialogue. The user opens; each system decision is rewarded with
// the task reward plus the emotion reward of the perceived emotion in the
// user's reply. The decision that ends the dialogue (user goodbye or turn
// cap) gets the terminal task reward instead of the per-turn one. Any module
// failure marks the episode aborted.
EpisodeResult run_episode(const DialoguePolicy& policy, const Modules& modules,
                          const UserGoal& goal, std::uint64_t seed);

struct TrainConfig {
  int total_dialogues = 3000;
  int eval_interval = 500;
  int eval_dialogues = 300;
  int max_turns = 20;
  int batch_episodes = 16;
  int workers = 0;  // OpenMP threads for rollouts; 0 keeps the runtime default
  double max_abort_fraction = 0.01;
  RewardConfig reward;
  AblationFlags ablation;
  PolicyConfig policy;
  PpoConfig ppo;
  // Behaviour-cloning warm start on dialogues played by a noisy operator.
  int bc_dialogues = 200;
  double bc_noise = 0.3;
  BcConfig bc;
  GoalConfig goals;
  double erc_flip = 0.1;
  // Optional JSON overrides of the built-in tables. Relative paths in a
  // config file are resolved against the file's directory.
  std::string rules_file;
  std::string personas_file;
  std::string lexicon_file;
  std::string templates_file;
  // Annotated corpus for the warm start instead of operator dialogues.
  std::string bc_corpus;

  void validate() const;  // throws ConfigError
  static TrainConfig full_scale();
};

void to_json(Json& j, const TrainConfig& c);
// Missing keys keep their defaults.
TrainConfig train_config_from_json(const Json& j);
TrainConfig load_train_config(const std::string& path);

struct EvalPoint {
  int dialogues = 0;  // training dialogues seen
  double success_rate = 0.0;
  double inform_rate = 0.0;
  double mean_sentiment = 0.0;
  double mean_return = 0.0;
  double hallucination_rate = 0.0;
  std::string checkpoint;
};

struct TrainResult {
  std::vector<EvalPoint> curve;
  std::size_t best = 0;
  PolicyModel best_model;
  std::vector<EpisodeRecord> best_eval_episodes;
  std::vector<double> bc_losses;
  std::size_t aborted = 0;
};

Modules make_modules(const TrainConfig& config, const Ontology& ontology);
PolicyModel make_policy(const TrainConfig& config, const Ontology& ontology, std::uint64_t seed);

// Plays `n` dialogues on goals and seeds derived from `base_seed`.
std::vector<EpisodeResult> collect(const DialoguePolicy& policy, const Modules& modules,
                                   std::uint64_t base_seed, std::size_t first, std::size_t n,
                                   const GoalConfig& goals, ExecutionMode mode);

// Greedy evaluation dialogues; goal i is the same for every call with the
// same seed.
std::vector<EpisodeRecord> evaluate_policy(const PolicyModel& model, const Modules& modules,
                                           std::uint64_t seed, int dialogues,
                                           const GoalConfig& goals, ExecutionMode mode);

// Operator dialogues turned into behaviour-cloning examples.
std::vector<BcExample> operator_corpus(const PolicyModel& model, const Modules& modules,
                                       std::uint64_t seed, int dialogues, double noise,
                                       const GoalConfig& goals, ExecutionMode mode);

// Full schedule: warm start, then PPO on batches of sampled rollouts with a
// greedy evaluation and a checkpoint every eval_interval dialogues. The best
// checkpoint has the highest mean return. With a non-empty out_dir, writes
// curves.json, episodes.jsonl, eval_episodes.jsonl and checkpoints/.
TrainResult train(const TrainConfig& config, std::uint64_t seed, const Ontology& ontology,
                  const std::string& out_dir = "", ExecutionMode mode = ExecutionMode::kParallel);

Json curves_to_json(const TrainConfig& config, std::uint64_t seed, const TrainResult& result);

}  // namespace affectod

#endif  // AFFECTOD_TRAINER_H_
