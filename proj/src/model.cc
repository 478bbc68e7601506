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

#include "affectod/model.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "affectod/errors.h"

namespace affectod {
namespace {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using CMap = Map<const MatrixXd>;
using CVec = Map<const VectorXd>;

// Masked softmax; disallowed entries get probability 0.
std::vector<double> masked_softmax(const VectorXd& z, const std::vector<bool>& allowed) {
  std::vector<double> p(static_cast<std::size_t>(z.size()), 0.0);
  double mx = -INFINITY;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (allowed[i]) mx = std::max(mx, z[static_cast<Eigen::Index>(i)]);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (allowed[i]) s += (p[i] = std::exp(z[static_cast<Eigen::Index>(i)] - mx));
  for (double& v : p) v /= s;
  return p;
}

double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace

void PolicyConfig::validate() const {
  if (embed_dim < 1 || hidden_dim < 1 || critic_hidden < 1)
    throw ConfigError("policy dimensions must be positive");
  if (layers != 1) throw ConfigError("only single-layer decoders are supported");
  if (max_acts < 1) throw ConfigError("max_acts must be >= 1");
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be positive");
}

void to_json(Json& j, const PolicyConfig& c) {
  j = Json{{"embed_dim", c.embed_dim},           {"hidden_dim", c.hidden_dim},
           {"layers", c.layers},                 {"critic_hidden", c.critic_hidden},
           {"max_acts", c.max_acts},             {"init_scale", c.init_scale},
           {"emotion_in_state", c.emotion_in_state}, {"conduct_output", c.conduct_output}};
}

void from_json(const Json& j, PolicyConfig& c) {
  PolicyConfig d;
  c.embed_dim = j.value("embed_dim", d.embed_dim);
  c.hidden_dim = j.value("hidden_dim", d.hidden_dim);
  c.layers = j.value("layers", d.layers);
  c.critic_hidden = j.value("critic_hidden", d.critic_hidden);
  c.max_acts = j.value("max_acts", d.max_acts);
  c.init_scale = j.value("init_scale", d.init_scale);
  c.emotion_in_state = j.value("emotion_in_state", d.emotion_in_state);
  c.conduct_output = j.value("conduct_output", d.conduct_output);
}

PolicyModel::PolicyModel(std::size_t feature_dim, Vocabulary vocab, PolicyConfig config,
                         std::uint64_t seed)
    : feature_dim_(feature_dim), vocab_(std::move(vocab)), config_(config) {
  config_.validate();
  if (vocab_.num_acts() == 0) throw ConfigError("vocabulary has no act tokens");
  build_layout();
  params_ = VectorXd::Zero(static_cast<Eigen::Index>(L_.total));
  Rng rng(seed);
  auto fill = [&](std::size_t off, std::size_t n, double std) {
    for (std::size_t i = 0; i < n; ++i) params_[static_cast<Eigen::Index>(off + i)] = rng.normal() * std;
  };
  const auto F = static_cast<double>(feature_dim_);
  const auto De = static_cast<std::size_t>(config_.embed_dim);
  const auto H = static_cast<std::size_t>(config_.hidden_dim);
  const auto C = static_cast<std::size_t>(config_.critic_hidden);
  const std::size_t V = vocab_.size();
  fill(L_.E, De * (V + 1), 1.0);
  fill(L_.Wxh, H * feature_dim_, 1.0 / std::sqrt(std::max(F, 1.0)));
  fill(L_.Weh, H * De, 1.0 / std::sqrt(static_cast<double>(De)));
  fill(L_.Whh, H * H, 0.5 / std::sqrt(static_cast<double>(H)));
  fill(L_.Wo, V * H, config_.init_scale / std::sqrt(static_cast<double>(H)));
  fill(L_.W1, C * feature_dim_, 1.0 / std::sqrt(std::max(F, 1.0)));
}

void PolicyModel::build_layout() {
  const auto De = static_cast<std::size_t>(config_.embed_dim);
  const auto H = static_cast<std::size_t>(config_.hidden_dim);
  const auto C = static_cast<std::size_t>(config_.critic_hidden);
  const std::size_t V = vocab_.size();
  const std::size_t F = feature_dim_;
  std::size_t off = 0;
  auto take = [&](std::size_t n) {
    const std::size_t at = off;
    off += n;
    return at;
  };
  L_.E = take(De * (V + 1));
  L_.Wxh = take(H * F);
  L_.Weh = take(H * De);
  L_.Whh = take(H * H);
  L_.b = take(H);
  L_.Wo = take(V * H);
  L_.bo = take(V);
  L_.W1 = take(C * F);
  L_.b1 = take(C);
  L_.w2 = take(C);
  L_.b2 = take(1);
  L_.total = off;
}

std::vector<bool> PolicyModel::mask(std::span<const std::size_t> prefix) const {
  const std::size_t V = vocab_.size();
  std::vector<bool> m(V, false);
  bool stopped = false;
  for (std::size_t t : prefix) stopped = stopped || t == vocab_.stop();
  if (stopped) {
    if (config_.conduct_output && prefix.back() == vocab_.stop())
      for (Conduct c : kAllConducts) m[vocab_.conduct_token(c)] = true;
    return m;
  }
  if (prefix.size() >= static_cast<std::size_t>(config_.max_acts)) {
    m[vocab_.stop()] = true;
    return m;
  }
  for (std::size_t i = 0; i < vocab_.num_acts(); ++i) m[i] = true;
  for (std::size_t t : prefix) m[t] = false;
  m[vocab_.stop()] = !prefix.empty();
  return m;
}

bool PolicyModel::complete(std::span<const std::size_t> prefix) const {
  if (prefix.empty()) return false;
  if (config_.conduct_output) return vocab_.is_conduct(prefix.back());
  return prefix.back() == vocab_.stop();
}

std::vector<double> PolicyModel::next_distribution(std::span<const double> x,
                                                   std::span<const std::size_t> prefix) const {
  const auto De = config_.embed_dim, H = config_.hidden_dim;
  const auto V = static_cast<Eigen::Index>(vocab_.size());
  const auto F = static_cast<Eigen::Index>(feature_dim_);
  const double* p = params_.data();
  CMap E(p + L_.E, De, V + 1), Wxh(p + L_.Wxh, H, F), Weh(p + L_.Weh, H, De),
      Whh(p + L_.Whh, H, H), Wo(p + L_.Wo, V, H);
  CVec b(p + L_.b, H), bo(p + L_.bo, V), xv(x.data(), F);
  const VectorXd base = Wxh * xv + b;
  VectorXd h = VectorXd::Zero(H);
  Eigen::Index prev = V;  // BOS
  for (std::size_t t = 0; t <= prefix.size(); ++t) {
    h = (base + Weh * E.col(prev) + Whh * h).array().tanh().matrix();
    if (t < prefix.size()) prev = static_cast<Eigen::Index>(prefix[t]);
  }
  return masked_softmax(Wo * h + bo, mask(prefix));
}

DecodeResult PolicyModel::decide(std::span<const double> x, DecodeMode mode, Rng& rng) const {
  const auto De = config_.embed_dim, H = config_.hidden_dim;
  const auto V = static_cast<Eigen::Index>(vocab_.size());
  const auto F = static_cast<Eigen::Index>(feature_dim_);
  const double* p = params_.data();
  CMap E(p + L_.E, De, V + 1), Wxh(p + L_.Wxh, H, F), Weh(p + L_.Weh, H, De),
      Whh(p + L_.Whh, H, H), Wo(p + L_.Wo, V, H);
  CVec b(p + L_.b, H), bo(p + L_.bo, V), xv(x.data(), F);
  const VectorXd base = Wxh * xv + b;
  VectorXd h = VectorXd::Zero(H);
  Eigen::Index prev = V;
  DecodeResult r;
  while (!complete(r.tokens)) {
    h = (base + Weh * E.col(prev) + Whh * h).array().tanh().matrix();
    const auto probs = masked_softmax(Wo * h + bo, mask(r.tokens));
    std::size_t pick = 0;
    if (mode == DecodeMode::kGreedy) {
      for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[pick]) pick = i;
    } else {
      pick = rng.categorical(probs);
    }
    r.log_prob += std::log(probs[pick]);
    r.tokens.push_back(pick);
    prev = static_cast<Eigen::Index>(pick);
  }
  for (std::size_t t : r.tokens) {
    if (vocab_.is_act(t)) r.acts.push_back(t);
    if (vocab_.is_conduct(t)) r.conduct = vocab_.at(t).conduct;
  }
  r.value = value(x);
  return r;
}

double PolicyModel::value(std::span<const double> x) const {
  const auto C = config_.critic_hidden;
  const auto F = static_cast<Eigen::Index>(feature_dim_);
  const double* p = params_.data();
  CMap W1(p + L_.W1, C, F);
  CVec b1(p + L_.b1, C), w2(p + L_.w2, C), xv(x.data(), F);
  const VectorXd a = (W1 * xv + b1).array().tanh().matrix();
  return w2.dot(a) + p[L_.b2];
}

PolicyModel::SequenceEval PolicyModel::evaluate(std::span<const double> x,
                                                std::span<const std::size_t> tokens) const {
  VectorXd scratch;
  return accumulate_gradient(x, tokens, SequenceLossWeights{}, scratch);
}

PolicyModel::SequenceEval PolicyModel::accumulate_gradient(std::span<const double> x,
                                                           std::span<const std::size_t> tokens,
                                                           const SequenceLossWeights& w,
                                                           VectorXd& grad) const {
  return accumulate_gradient(
      x, tokens, [&w](const SequenceEval&) { return w; }, grad);
}

PolicyModel::SequenceEval PolicyModel::accumulate_gradient(std::span<const double> x,
                                                           std::span<const std::size_t> tokens,
                                                           const WeightFn& weights,
                                                           VectorXd& grad) const {
  const auto De = config_.embed_dim, H = config_.hidden_dim, C = config_.critic_hidden;
  const auto V = static_cast<Eigen::Index>(vocab_.size());
  const auto F = static_cast<Eigen::Index>(feature_dim_);
  const double* p = params_.data();
  CMap E(p + L_.E, De, V + 1), Wxh(p + L_.Wxh, H, F), Weh(p + L_.Weh, H, De),
      Whh(p + L_.Whh, H, H), Wo(p + L_.Wo, V, H), W1(p + L_.W1, C, F);
  CVec b(p + L_.b, H), bo(p + L_.bo, V), b1(p + L_.b1, C), w2(p + L_.w2, C), xv(x.data(), F);

  const std::size_t n = tokens.size();
  const VectorXd base = Wxh * xv + b;
  std::vector<VectorXd> hs(n + 1, VectorXd::Zero(H));  // hs[t+1] = h_t
  std::vector<std::vector<double>> ps(n);
  std::vector<double> ents(n);
  SequenceEval ev;
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::Index prev = t == 0 ? V : static_cast<Eigen::Index>(tokens[t - 1]);
    hs[t + 1] = (base + Weh * E.col(prev) + Whh * hs[t]).array().tanh().matrix();
    ps[t] = masked_softmax(Wo * hs[t + 1] + bo, mask(tokens.first(t)));
    const double pt = ps[t][tokens[t]];
    if (!(pt > 0.0)) throw NumericalError("token " + std::to_string(tokens[t]) + " is masked at step " + std::to_string(t));
    ev.log_prob += std::log(pt);
    ents[t] = entropy_of(ps[t]);
    ev.entropy += ents[t];
  }
  const VectorXd a = (W1 * xv + b1).array().tanh().matrix();
  ev.value = w2.dot(a) + p[L_.b2];

  const SequenceLossWeights w = weights(ev);
  if (w.log_prob == 0.0 && w.entropy == 0.0 && w.value == 0.0) return ev;
  if (grad.size() != params_.size()) grad = VectorXd::Zero(params_.size());
  double* g = grad.data();
  Map<MatrixXd> gE(g + L_.E, De, V + 1), gWxh(g + L_.Wxh, H, F), gWeh(g + L_.Weh, H, De),
      gWhh(g + L_.Whh, H, H), gWo(g + L_.Wo, V, H), gW1(g + L_.W1, C, F);
  Map<VectorXd> gb(g + L_.b, H), gbo(g + L_.bo, V), gb1(g + L_.b1, C), gw2(g + L_.w2, C);

  if (w.log_prob != 0.0 || w.entropy != 0.0) {
    VectorXd dh_next = VectorXd::Zero(H);
    VectorXd da_sum = VectorXd::Zero(H);
    for (std::size_t t = n; t-- > 0;) {
      VectorXd dz = VectorXd::Zero(V);
      for (Eigen::Index k = 0; k < V; ++k) {
        const double pk = ps[t][static_cast<std::size_t>(k)];
        if (pk <= 0.0) continue;
        const double onehot = static_cast<std::size_t>(k) == tokens[t] ? 1.0 : 0.0;
        dz[k] = w.log_prob * (onehot - pk) - w.entropy * pk * (std::log(pk) + ents[t]);
      }
      gWo.noalias() += dz * hs[t + 1].transpose();
      gbo += dz;
      const VectorXd dh = Wo.transpose() * dz + dh_next;
      const VectorXd da = dh.array() * (1.0 - hs[t + 1].array().square());
      const Eigen::Index prev = t == 0 ? V : static_cast<Eigen::Index>(tokens[t - 1]);
      gWeh.noalias() += da * E.col(prev).transpose();
      gWhh.noalias() += da * hs[t].transpose();
      gE.col(prev).noalias() += Weh.transpose() * da;
      da_sum += da;
      dh_next = Whh.transpose() * da;
    }
    gWxh.noalias() += da_sum * xv.transpose();
    gb += da_sum;
  }
  if (w.value != 0.0) {
    gw2 += w.value * a;
    g[L_.b2] += w.value;
    const VectorXd da = (w.value * w2).array() * (1.0 - a.array().square());
    gW1.noalias() += da * xv.transpose();
    gb1 += da;
  }
  return ev;
}

std::string fnv1a_hex(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string PolicyModel::config_hash() const {
  Json j;
  j["config"] = config_;
  j["feature_dim"] = feature_dim_;
  j["vocab"] = Json::array();
  for (std::size_t i = 0; i < vocab_.size(); ++i) j["vocab"].push_back(to_string(vocab_.at(i)));
  return fnv1a_hex(j);
}

Json checkpoint_to_json(const PolicyModel& model) {
  Json j;
  j["format"] = "affectod-policy";
  j["version"] = 1;
  j["config"] = model.config_;
  j["feature_dim"] = model.feature_dim_;
  j["config_hash"] = model.config_hash();
  j["vocab"] = Json::array();
  for (std::size_t i = 0; i < model.vocab_.size(); ++i) j["vocab"].push_back(to_string(model.vocab_.at(i)));
  j["params"] = std::vector<double>(model.params_.data(), model.params_.data() + model.params_.size());
  return j;
}

PolicyModel checkpoint_from_json(const Json& j, const Vocabulary& vocab) {
  try {
    if (j.at("format") != "affectod-policy" || j.at("version") != 1)
      throw ConfigError("not a version 1 policy checkpoint");
    const auto names = j.at("vocab").get<std::vector<std::string>>();
    if (names.size() != vocab.size()) throw ConfigError("checkpoint vocabulary size mismatch");
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] != to_string(vocab.at(i)))
        throw ConfigError("checkpoint vocabulary mismatch at token " + std::to_string(i));
    PolicyModel m;
    m.feature_dim_ = j.at("feature_dim").get<std::size_t>();
    m.vocab_ = vocab;
    m.config_ = j.at("config").get<PolicyConfig>();
    m.config_.validate();
    m.build_layout();
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != m.L_.total) throw ConfigError("checkpoint parameter count mismatch");
    m.params_ = Eigen::Map<const VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
    if (j.contains("config_hash") && j["config_hash"] != m.config_hash())
      throw ConfigError("checkpoint config hash mismatch");
    return m;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const PolicyModel& model, const Json& extra) {
  Json j = checkpoint_to_json(model);
  if (!extra.is_null()) j["meta"] = extra;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << j.dump() << "\n";
}

PolicyModel load_checkpoint(const std::string& path, const Vocabulary& vocab, Json* extra) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse checkpoint " + path + ": " + e.what());
  }
  if (extra) *extra = j.value("meta", Json());
  return checkpoint_from_json(j, vocab);
}

Adam::Adam(std::size_t n, AdamConfig config)
    : config_(config),
      m_(VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v_(VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

void Adam::step(VectorXd& params, VectorXd grad) {
  if (config_.max_grad_norm > 0.0) {
    const double norm = grad.norm();
    if (norm > config_.max_grad_norm) grad *= config_.max_grad_norm / norm;
  }
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  params.array() -= config_.learning_rate * (m_.array() / c1) /
                    ((v_.array() / c2).sqrt() + config_.epsilon);
}

}  // namespace affectod
