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

#ifndef AFFECTOD_MODEL_H_
#define AFFECTOD_MODEL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "affectod/act.h"
#include "affectod/labels.h"
#include "affectod/rng.h"
#include "affectod/vocab.h"

namespace affectod {

struct PolicyConfig {
  int embed_dim = 32;
  int hidden_dim = 128;
  int layers = 1;  // only single-layer decoders are implemented
  int critic_hidden = 64;
  int max_acts = 6;
  double init_scale = 0.1;
  bool emotion_in_state = true;
  bool conduct_output = true;
  void validate() const;  // throws ConfigError
};

void to_json(Json& j, const PolicyConfig& c);
void from_json(const Json& j, PolicyConfig& c);

enum class DecodeMode { kSample, kGreedy };

// Tokens of one decision: acts, STOP, and the conduct token when conduct
// output is enabled.
struct DecodeResult {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> acts;
  Conduct conduct = Conduct::kNeutral;
  double log_prob = 0.0;
  double value = 0.0;
};

// Gradient contributions requested from one sequence.
struct SequenceLossWeights {
  double log_prob = 0.0;  // dLoss/d(sum of token log-probs)
  double entropy = 0.0;   // dLoss/d(sum of per-step entropies)
  double value = 0.0;     // dLoss/dV(x)
};

// Elman decoder conditioned on the state at every step:
//   h_t = tanh(Wxh x + Weh e(y_{t-1}) + Whh h_{t-1} + b),  p_t = softmax(mask(Wo h_t + bo))
// with y_0 = BOS, plus an MLP critic V(x) = w2 . tanh(W1 x + b1) + b2. All
// parameters live in one flat vector.
class PolicyModel {
 public:
  PolicyModel() = default;
  PolicyModel(std::size_t feature_dim, Vocabulary vocab, PolicyConfig config, std::uint64_t seed);

  std::size_t feature_dim() const { return feature_dim_; }
  const Vocabulary& vocab() const { return vocab_; }
  const PolicyConfig& config() const { return config_; }
  // Copy with emotion input and/or conduct output switched off (flags can
  // only be cleared; the parameter layout does not change).
  PolicyModel restricted(bool emotion_in_state, bool conduct_output) const {
    PolicyModel m = *this;
    m.config_.emotion_in_state = config_.emotion_in_state && emotion_in_state;
    m.config_.conduct_output = config_.conduct_output && conduct_output;
    return m;
  }
  PolicyConfig& mutable_config() { return config_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Allowed-token mask after `prefix` (the tokens decoded so far).
  std::vector<bool> mask(std::span<const std::size_t> prefix) const;
  // True once `prefix` is a complete decision.
  bool complete(std::span<const std::size_t> prefix) const;

  // Next-token distribution after `prefix`.
  std::vector<double> next_distribution(std::span<const double> x,
                                        std::span<const std::size_t> prefix) const;

  DecodeResult decide(std::span<const double> x, DecodeMode mode, Rng& rng) const;

  double value(std::span<const double> x) const;

  struct SequenceEval {
    double log_prob = 0.0;
    double entropy = 0.0;
    double value = 0.0;
  };
  // Log-probability and summed entropy of a full token sequence.
  SequenceEval evaluate(std::span<const double> x, std::span<const std::size_t> tokens) const;

  // Adds the gradient of w.log_prob * logp + w.entropy * H + w.value * V to
  // `grad` and returns the evaluation.
  SequenceEval accumulate_gradient(std::span<const double> x, std::span<const std::size_t> tokens,
                                   const SequenceLossWeights& w, Eigen::VectorXd& grad) const;
  // Same, with weights chosen after the forward pass.
  using WeightFn = std::function<SequenceLossWeights(const SequenceEval&)>;
  SequenceEval accumulate_gradient(std::span<const double> x, std::span<const std::size_t> tokens,
                                   const WeightFn& weights, Eigen::VectorXd& grad) const;

  // FNV-1a of the canonical JSON dump of config + dimensions.
  std::string config_hash() const;

 private:
  struct Layout {
    std::size_t E, Wxh, Weh, Whh, b, Wo, bo, W1, b1, w2, b2, total;
  };
  void build_layout();

  std::size_t feature_dim_ = 0;
  Vocabulary vocab_;
  PolicyConfig config_;
  Layout L_{};
  Eigen::VectorXd params_;

  friend Json checkpoint_to_json(const PolicyModel& model);
  friend PolicyModel checkpoint_from_json(const Json& j, const Vocabulary& vocab);
};

Json checkpoint_to_json(const PolicyModel& model);
// The vocabulary is rebuilt from the ontology by the caller and must match
// the stored token list.
PolicyModel checkpoint_from_json(const Json& j, const Vocabulary& vocab);
void save_checkpoint(const std::string& path, const PolicyModel& model, const Json& extra = {});
PolicyModel load_checkpoint(const std::string& path, const Vocabulary& vocab, Json* extra = nullptr);

// FNV-1a 64 over the canonical dump of a JSON value, as 16 hex digits.
std::string fnv1a_hex(const Json& j);

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double max_grad_norm = 1.0;  // <= 0 disables clipping
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, AdamConfig config);
  // Descends along `grad` (clipped by global norm).
  void step(Eigen::VectorXd& params, Eigen::VectorXd grad);
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

}  // namespace affectod

#endif  // AFFECTOD_MODEL_H_
