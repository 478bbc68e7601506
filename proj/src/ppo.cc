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

#include "affectod/ppo.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affectod/errors.h"

namespace affectod {
namespace {

// Contiguous [begin, end) ranges; the partition depends only on n and k.
std::vector<std::pair<std::size_t, std::size_t>> partition(std::size_t n, int k) {
  const std::size_t parts = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(k, 1))));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < parts; ++c) out.emplace_back(n * c / parts, n * (c + 1) / parts);
  return out;
}

struct ChunkResult {
  double policy = 0.0, value = 0.0, entropy = 0.0;
  Eigen::VectorXd grad;
};

// Runs `body(chunk_index, range, result)` over every chunk, in parallel or
// serially, then reduces in chunk order.
template <typename Body>
ChunkResult over_chunks(std::size_t n, int chunks, std::size_t num_params, ExecutionMode mode,
                        bool with_grad, Body body) {
  const auto parts = partition(n, chunks);
  std::vector<ChunkResult> results(parts.size());
  const auto np = static_cast<long>(parts.size());
  if (mode == ExecutionMode::kParallel) {
#pragma omp parallel for schedule(static)
    for (long c = 0; c < np; ++c) {
      auto& r = results[static_cast<std::size_t>(c)];
      if (with_grad) r.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params));
      body(parts[static_cast<std::size_t>(c)], r);
    }
  } else {
    for (long c = 0; c < np; ++c) {
      auto& r = results[static_cast<std::size_t>(c)];
      if (with_grad) r.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params));
      body(parts[static_cast<std::size_t>(c)], r);
    }
  }
  ChunkResult total;
  if (with_grad) total.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params));
  for (const auto& r : results) {
    total.policy += r.policy;
    total.value += r.value;
    total.entropy += r.entropy;
    if (with_grad) total.grad += r.grad;
  }
  return total;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

double Trajectory::episode_return() const {
  double r = 0.0;
  for (const auto& s : steps) r += s.reward;
  return r;
}

void PpoConfig::validate() const {
  if (!(clip > 0.0)) throw ConfigError("ppo clip must be positive");
  if (gamma < 0.0 || gamma > 1.0 || lambda < 0.0 || lambda > 1.0)
    throw ConfigError("gamma and lambda must be in [0,1]");
  if (epochs < 1) throw ConfigError("ppo epochs must be >= 1");
  if (chunks < 1) throw ConfigError("ppo chunks must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

void to_json(Json& j, const PpoConfig& c) {
  j = Json{{"clip", c.clip},
           {"gamma", c.gamma},
           {"lambda", c.lambda},
           {"entropy_coef", c.entropy_coef},
           {"value_coef", c.value_coef},
           {"epochs", c.epochs},
           {"normalize_advantages", c.normalize_advantages},
           {"chunks", c.chunks},
           {"learning_rate", c.adam.learning_rate},
           {"max_grad_norm", c.adam.max_grad_norm}};
}

void from_json(const Json& j, PpoConfig& c) {
  PpoConfig d;
  c.clip = j.value("clip", d.clip);
  c.gamma = j.value("gamma", d.gamma);
  c.lambda = j.value("lambda", d.lambda);
  c.entropy_coef = j.value("entropy_coef", d.entropy_coef);
  c.value_coef = j.value("value_coef", d.value_coef);
  c.epochs = j.value("epochs", d.epochs);
  c.normalize_advantages = j.value("normalize_advantages", d.normalize_advantages);
  c.chunks = j.value("chunks", d.chunks);
  c.adam.learning_rate = j.value("learning_rate", d.adam.learning_rate);
  c.adam.max_grad_norm = j.value("max_grad_norm", d.adam.max_grad_norm);
}

std::vector<Sample> build_samples(std::span<const Trajectory> trajectories, const PpoConfig& config) {
  std::vector<Sample> out;
  for (const auto& tr : trajectories) {
    if (tr.aborted || tr.steps.empty()) continue;
    if (std::any_of(tr.steps.begin(), tr.steps.end(), [](const Step& s) { return s.tokens.empty(); }))
      continue;
    const std::size_t n = tr.steps.size();
    std::vector<double> adv(n);
    double next_adv = 0.0, next_value = 0.0;
    for (std::size_t t = n; t-- > 0;) {
      const bool terminal = t + 1 == n;
      const double delta = tr.steps[t].reward + (terminal ? 0.0 : config.gamma * next_value) -
                           tr.steps[t].value;
      adv[t] = delta + (terminal ? 0.0 : config.gamma * config.lambda * next_adv);
      next_adv = adv[t];
      next_value = tr.steps[t].value;
    }
    for (std::size_t t = 0; t < n; ++t) {
      const Step& s = tr.steps[t];
      out.push_back({s.features, s.tokens, s.log_prob, adv[t], adv[t] + s.value});
    }
  }
  return out;
}

void normalize_advantages(std::vector<Sample>& samples) {
  if (samples.empty()) return;
  double mean = 0.0;
  for (const auto& s : samples) mean += s.advantage;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const auto& s : samples) var += (s.advantage - mean) * (s.advantage - mean);
  const double sd = std::sqrt(var / static_cast<double>(samples.size()));
  for (auto& s : samples) {
    s.advantage -= mean;
    if (sd >= 1e-8) s.advantage /= sd;
  }
}

LossEval ppo_loss(const PolicyModel& model, std::span<const Sample> samples,
                  const PpoConfig& config, ExecutionMode mode, bool with_grad) {
  LossEval out;
  if (samples.empty()) {
    out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.num_params()));
    return out;
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  auto total = over_chunks(
      samples.size(), config.chunks, model.num_params(), mode, with_grad,
      [&](std::pair<std::size_t, std::size_t> range, ChunkResult& r) {
        Eigen::VectorXd scratch;
        for (std::size_t i = range.first; i < range.second; ++i) {
          const Sample& s = samples[i];
          double pol = 0.0, val = 0.0;
          auto weights = [&](const PolicyModel::SequenceEval& ev) {
            const double ratio = std::exp(ev.log_prob - s.log_prob_old);
            const double unclipped = ratio * s.advantage;
            const double clipped =
                std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * s.advantage;
            pol = -std::min(unclipped, clipped);
            val = 0.5 * (ev.value - s.ret) * (ev.value - s.ret);
            SequenceLossWeights w;
            w.log_prob = (unclipped <= clipped ? -s.advantage * ratio : 0.0) * inv_n;
            w.entropy = -config.entropy_coef * inv_n;
            w.value = config.value_coef * (ev.value - s.ret) * inv_n;
            return with_grad ? w : SequenceLossWeights{};
          };
          const auto ev = model.accumulate_gradient(s.features, s.tokens, weights,
                                                    with_grad ? r.grad : scratch);
          r.policy += pol;
          r.value += val;
          r.entropy += ev.entropy;
        }
      });
  out.policy_loss = total.policy * inv_n;
  out.value_loss = total.value * inv_n;
  out.entropy = total.entropy * inv_n;
  out.total = out.policy_loss + config.value_coef * out.value_loss - config.entropy_coef * out.entropy;
  out.grad = std::move(total.grad);
  return out;
}

UpdateStats ppo_update(PolicyModel& model, Adam& optimizer, std::span<const Sample> samples,
                       const PpoConfig& config, ExecutionMode mode) {
  config.validate();
  UpdateStats stats;
  stats.samples = samples.size();
  if (samples.empty()) return stats;
  for (const auto& s : samples) stats.mean_return += s.ret;
  stats.mean_return /= static_cast<double>(samples.size());

  const Eigen::VectorXd snapshot = model.params();
  const Adam optimizer_snapshot = optimizer;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    LossEval le = ppo_loss(model, samples, config, mode, true);
    if (!std::isfinite(le.total) || !finite(le.grad)) {
      model.params() = snapshot;
      optimizer = optimizer_snapshot;
      throw NumericalError("non-finite PPO loss at epoch " + std::to_string(epoch) +
                           " (policy " + std::to_string(le.policy_loss) + ", value " +
                           std::to_string(le.value_loss) + ", entropy " +
                           std::to_string(le.entropy) + ")");
    }
    if (epoch == 0) {
      stats.policy_loss = le.policy_loss;
      stats.value_loss = le.value_loss;
      stats.entropy = le.entropy;
    }
    optimizer.step(model.params(), std::move(le.grad));
  }
  return stats;
}

std::vector<std::size_t> encode_decision(const PolicyModel& model,
                                         std::span<const SemanticAct> acts, Conduct conduct) {
  const Vocabulary& vocab = model.vocab();
  std::vector<std::size_t> tokens;
  std::vector<std::string> offenders;
  for (const auto& a : acts) {
    auto idx = vocab.find(a);
    if (!idx) {
      offenders.push_back(to_string(a));
      continue;
    }
    if (std::find(tokens.begin(), tokens.end(), *idx) == tokens.end()) tokens.push_back(*idx);
  }
  if (!offenders.empty()) {
    std::string msg = "acts outside the policy vocabulary:";
    for (const auto& o : offenders) msg += " " + o;
    throw IngestionError(msg);
  }
  if (tokens.empty()) throw IngestionError("decision without acts");
  if (tokens.size() > static_cast<std::size_t>(model.config().max_acts))
    tokens.resize(static_cast<std::size_t>(model.config().max_acts));
  tokens.push_back(vocab.stop());
  if (model.config().conduct_output) tokens.push_back(vocab.conduct_token(conduct));
  return tokens;
}

void to_json(Json& j, const BcConfig& c) {
  j = Json{{"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"seed", c.seed}};
}

void from_json(const Json& j, BcConfig& c) {
  BcConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.seed = j.value("seed", d.seed);
}

namespace {

ChunkResult bc_pass(const PolicyModel& model, std::span<const BcExample> corpus,
                    std::span<const std::size_t> order, ExecutionMode mode, bool with_grad) {
  const double inv_n = 1.0 / static_cast<double>(order.size());
  return over_chunks(order.size(), 8, model.num_params(), mode, with_grad,
                     [&](std::pair<std::size_t, std::size_t> range, ChunkResult& r) {
                       Eigen::VectorXd scratch;
                       SequenceLossWeights w;
                       if (with_grad) w.log_prob = -inv_n;
                       for (std::size_t i = range.first; i < range.second; ++i) {
                         const BcExample& ex = corpus[order[i]];
                         const auto ev = model.accumulate_gradient(ex.features, ex.tokens, w,
                                                                   with_grad ? r.grad : scratch);
                         r.policy -= ev.log_prob;
                       }
                     });
}

}  // namespace

double bc_loss(const PolicyModel& model, std::span<const BcExample> corpus, ExecutionMode mode) {
  if (corpus.empty()) return 0.0;
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  return bc_pass(model, corpus, order, mode, false).policy / static_cast<double>(corpus.size());
}

std::vector<double> clone_behavior(PolicyModel& model, std::span<const BcExample> corpus,
                                   const BcConfig& config, ExecutionMode mode) {
  if (corpus.empty()) throw IngestionError("behaviour cloning corpus is empty");
  if (config.epochs < 1 || config.batch_size < 1) throw ConfigError("bad behaviour cloning config");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& ex = corpus[i];
    if (ex.features.size() != model.feature_dim())
      throw IngestionError("example " + std::to_string(i) + " has the wrong feature length");
    if (!model.complete(ex.tokens))
      throw IngestionError("example " + std::to_string(i) + " is not a complete decision");
    for (std::size_t t = 0; t < ex.tokens.size(); ++t)
      if (!model.mask(std::span(ex.tokens).first(t))[ex.tokens[t]])
        throw IngestionError("example " + std::to_string(i) + " has an invalid token at step " +
                             std::to_string(t));
  }
  AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  Adam opt(model.num_params(), ac);
  Rng rng(config.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> curve;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(config.batch_size));
      auto r = bc_pass(model, corpus, std::span(order).subspan(b, e - b), mode, true);
      if (!finite(r.grad)) throw NumericalError("non-finite behaviour cloning gradient");
      opt.step(model.params(), std::move(r.grad));
    }
    curve.push_back(bc_loss(model, corpus, mode));
  }
  return curve;
}

}  // namespace affectod
