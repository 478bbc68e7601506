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

#ifndef AFFECTOD_PPO_H_
#define AFFECTOD_PPO_H_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "affectod/model.h"

namespace affectod {

// One decision point of a rollout.
struct Step {
  std::vector<double> features;
  std::vector<std::size_t> tokens;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;  // rewards align one-to-one with decisions
  bool aborted = false;
  double episode_return() const;
};

struct Sample {
  std::vector<double> features;
  std::vector<std::size_t> tokens;
  double log_prob_old = 0.0;
  double advantage = 0.0;
  double ret = 0.0;  // value target
};

enum class ExecutionMode { kSerial, kParallel };

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int epochs = 8;
  bool normalize_advantages = true;
  int chunks = 8;  // fixed gradient partition; the reduction order never changes
  AdamConfig adam{.learning_rate = 7e-4};
  void validate() const;
};

void to_json(Json& j, const PpoConfig& c);
void from_json(const Json& j, PpoConfig& c);

// GAE(gamma, lambda) per trajectory; the last decision of each trajectory is
// terminal. Aborted trajectories are skipped.
std::vector<Sample> build_samples(std::span<const Trajectory> trajectories, const PpoConfig& config);

// Subtracts the batch mean and divides by the standard deviation (the
// division is skipped when the deviation is below 1e-8).
void normalize_advantages(std::vector<Sample>& samples);

struct LossEval {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;  // mean summed per-step entropy
  double total = 0.0;
  Eigen::VectorXd grad;
};

// Clipped surrogate + value_coef * 0.5 (V - R)^2 - entropy_coef * H, averaged
// over samples, with its gradient. Serial and parallel modes share the chunk
// partition and produce identical results.
LossEval ppo_loss(const PolicyModel& model, std::span<const Sample> samples,
                  const PpoConfig& config, ExecutionMode mode, bool with_grad = true);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_return = 0.0;  // mean value target of the batch
  std::size_t samples = 0;
};

// PPO-clip update: `config.epochs` full-batch Adam steps. Advantages are
// expected to be normalised already. Throws NumericalError (and leaves the
// parameters untouched) when the loss or gradient is not finite.
UpdateStats ppo_update(PolicyModel& model, Adam& optimizer, std::span<const Sample> samples,
                       const PpoConfig& config, ExecutionMode mode = ExecutionMode::kParallel);

struct BcExample {
  std::vector<double> features;
  std::vector<std::size_t> tokens;
};

// Token sequence for a (grounded or ungrounded) act list plus conduct.
// Duplicate acts are collapsed. Throws IngestionError naming offending acts
// that are not in the vocabulary.
std::vector<std::size_t> encode_decision(const PolicyModel& model,
                                         std::span<const SemanticAct> acts, Conduct conduct);

struct BcConfig {
  int epochs = 5;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 7;
};

void to_json(Json& j, const BcConfig& c);
void from_json(const Json& j, BcConfig& c);

// Teacher-forced cross-entropy over whole token sequences (acts, STOP,
// conduct). Returns the mean training loss after each epoch.
std::vector<double> clone_behavior(PolicyModel& model, std::span<const BcExample> corpus,
                                   const BcConfig& config,
                                   ExecutionMode mode = ExecutionMode::kParallel);

// Mean sequence negative log-likelihood.
double bc_loss(const PolicyModel& model, std::span<const BcExample> corpus,
               ExecutionMode mode = ExecutionMode::kParallel);

}  // namespace affectod

#endif  // AFFECTOD_PPO_H_
