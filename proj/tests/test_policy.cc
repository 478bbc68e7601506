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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "affectod/errors.h"
#include "affectod/trainer.h"
#include "doctest.h"
#include "support.h"

using namespace affectod;
using affectod::testing::desk;

namespace {

PolicyModel toy_model(std::size_t acts, std::size_t features, PolicyConfig cfg, std::uint64_t seed = 3) {
  return PolicyModel(features, Vocabulary::toy(acts), cfg, seed);
}

PolicyConfig tiny() {
  PolicyConfig c;
  c.embed_dim = 1;
  c.hidden_dim = 1;
  c.critic_hidden = 1;
  c.max_acts = 2;
  c.init_scale = 0.5;
  return c;
}

PolicyModel desk_model(std::uint64_t seed = 11) {
  PolicyConfig c;
  c.hidden_dim = 32;
  c.embed_dim = 16;
  c.critic_hidden = 16;
  return PolicyModel(feature_dim(desk()), Vocabulary(desk()), c, seed);
}

std::vector<DialogueState> some_states() {
  std::vector<DialogueState> out;
  DialogueState s = DialogueState::initial(desk());
  out.push_back(s);
  const std::vector<std::vector<SemanticAct>> turns = {
      {SemanticAct::inform("restaurant", "food", "italian")},
      {SemanticAct::request("restaurant", "phone")},
      {SemanticAct::inform("hotel", "area", "north"), SemanticAct::book("hotel")},
      {SemanticAct::inform("attraction", "type", "museum")}};
  for (const auto& t : turns) {
    s = track(s, t, desk());
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("featurize: length follows the documented formula") {
  std::size_t want = 0;
  for (const auto& d : desk().domains()) want += d.constrainable().size() + d.requestable.size() + 4 + 5 + 6;
  want += 3 + 2 + kNumEmotions;
  CHECK(feature_dim(desk()) == want);
  for (const auto& s : some_states()) CHECK(featurize(s, desk()).size() == want);
}

TEST_CASE("featurize: initial state is all zero apart from the neutral emotion") {
  const std::vector<double> x = featurize(DialogueState::initial(desk()), desk());
  const std::size_t off = emotion_offset(desk());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(x[i] == (i == off + index_of(UserEmotion::kNeutral) ? 1.0 : 0.0));
}

TEST_CASE("featurize: perceived emotion only touches the emotion block") {
  const std::size_t off = emotion_offset(desk());
  for (DialogueState s : some_states()) {
    const std::vector<double> a = featurize(s, desk());
    for (UserEmotion e : kAllEmotions) {
      s.perceived_emotion = e;
      const std::vector<double> b = featurize(s, desk());
      for (std::size_t i = 0; i < off; ++i) CHECK(a[i] == b[i]);
      for (std::size_t k = 0; k < kNumEmotions; ++k) CHECK(b[off + k] == (k == index_of(e) ? 1.0 : 0.0));
      const std::vector<double> z = featurize(s, desk(), false);
      for (std::size_t k = 0; k < kNumEmotions; ++k) CHECK(z[off + k] == 0.0);
    }
  }
}

TEST_CASE("decide: structure, masks and conduct token on 1e4 decodes") {
  const PolicyModel m = desk_model();
  const Vocabulary& v = m.vocab();
  Rng rng(5);
  const auto states = some_states();
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> x = featurize(states[i % states.size()], desk());
    const DecodeResult r = m.decide(x, DecodeMode::kSample, rng);
    REQUIRE(r.tokens.size() >= 2);
    const std::size_t n = r.tokens.size();
    CHECK(r.tokens[n - 2] == v.stop());
    CHECK(v.is_conduct(r.tokens[n - 1]));
    CHECK(v.at(r.tokens[n - 1]).conduct == r.conduct);
    std::size_t conducts = 0;
    for (std::size_t t : r.tokens) conducts += v.is_conduct(t) ? 1 : 0;
    CHECK(conducts == 1);
    CHECK(r.acts.size() <= static_cast<std::size_t>(m.config().max_acts));
    CHECK(std::set<std::size_t>(r.acts.begin(), r.acts.end()).size() == r.acts.size());
    for (std::size_t a : r.acts) CHECK(v.is_act(a));
    CHECK(r.log_prob == doctest::Approx(m.evaluate(x, r.tokens).log_prob).epsilon(1e-12));
  }
}

TEST_CASE("decide: next-token distributions are normalised") {
  const PolicyModel m = desk_model();
  Rng rng(1);
  for (const auto& s : some_states()) {
    const std::vector<double> x = featurize(s, desk());
    const DecodeResult r = m.decide(x, DecodeMode::kSample, rng);
    for (std::size_t t = 0; t < r.tokens.size(); ++t) {
      const auto prefix = std::span(r.tokens).first(t);
      const std::vector<double> p = m.next_distribution(x, prefix);
      const std::vector<bool> mask = m.mask(prefix);
      double sum = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        sum += p[k];
        if (!mask[k]) CHECK(p[k] == 0.0);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("decide: greedy decoding is deterministic") {
  const PolicyModel m = desk_model();
  Rng a(1), b(999);
  for (const auto& s : some_states()) {
    const std::vector<double> x = featurize(s, desk());
    const DecodeResult r1 = m.decide(x, DecodeMode::kGreedy, a);
    const DecodeResult r2 = m.decide(x, DecodeMode::kGreedy, b);
    CHECK(r1.tokens == r2.tokens);
    CHECK(r1.log_prob == r2.log_prob);
  }
}

TEST_CASE("decide: first token frequencies over 1e5 samples match the softmax") {
  const PolicyModel m = toy_model(4, 3, [] {
    PolicyConfig c;
    c.hidden_dim = 8;
    c.embed_dim = 4;
    c.critic_hidden = 4;
    c.init_scale = 0.8;
    return c;
  }());
  const std::vector<double> x = {0.3, -1.0, 0.5};
  const std::vector<double> p = m.next_distribution(x, {});
  std::vector<double> freq(p.size(), 0.0);
  Rng rng(77);
  const int n = 100000;
  for (int i = 0; i < n; ++i) freq[m.decide(x, DecodeMode::kSample, rng).tokens[0]] += 1.0 / n;
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(freq[k] - p[k]) < 0.01);
}

TEST_CASE("ppo_loss: analytic gradient matches central differences") {
  PolicyModel m = toy_model(2, 2, tiny(), 21);
  Rng rng(4);
  std::vector<Sample> batch;
  const std::vector<std::vector<double>> xs = {{1.0, -0.5}, {0.2, 0.7}, {-0.8, 0.1}, {0.5, 0.5}};
  const std::vector<double> adv = {1.3, -0.7, 0.4, -1.1};
  const std::vector<double> shift = {0.05, -0.04, 0.6, -0.7};  // last two are clipped
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const DecodeResult r = m.decide(xs[i], DecodeMode::kSample, rng);
    batch.push_back({xs[i], r.tokens, r.log_prob + shift[i], adv[i], 0.3 * static_cast<double>(i)});
  }
  PpoConfig cfg;
  cfg.chunks = 3;
  const LossEval le = ppo_loss(m, batch, cfg, ExecutionMode::kSerial);
  const Eigen::VectorXd theta = m.params();
  double worst = 0.0;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    m.params() = theta;
    m.params()[i] += h;
    const double up = ppo_loss(m, batch, cfg, ExecutionMode::kSerial, false).total;
    m.params()[i] -= 2 * h;
    const double down = ppo_loss(m, batch, cfg, ExecutionMode::kSerial, false).total;
    const double fd = (up - down) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(le.grad[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - le.grad[i]) / scale);
  }
  MESSAGE("parameters: " << theta.size() << ", worst relative error: " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("ppo_loss: zero advantages give a zero policy loss") {
  const PolicyModel m = desk_model();
  Rng rng(2);
  std::vector<Sample> batch;
  for (const auto& s : some_states()) {
    const std::vector<double> x = featurize(s, desk());
    const DecodeResult r = m.decide(x, DecodeMode::kSample, rng);
    batch.push_back({x, r.tokens, r.log_prob - 0.1, 0.0, 1.0});
  }
  PpoConfig cfg;
  const LossEval le = ppo_loss(m, batch, cfg, ExecutionMode::kSerial);
  CHECK(le.policy_loss == 0.0);
  CHECK(le.total == doctest::Approx(cfg.value_coef * le.value_loss - cfg.entropy_coef * le.entropy));
}

TEST_CASE("ppo_update: a one-state bandit learns the rewarded action") {
  PolicyConfig c;
  c.hidden_dim = 8;
  c.embed_dim = 4;
  c.critic_hidden = 4;
  c.max_acts = 1;
  c.conduct_output = false;
  PolicyModel m = toy_model(4, 1, c, 8);
  const std::vector<double> x = {1.0};
  const std::size_t target = 2;
  const double before = m.next_distribution(x, {})[target];
  PpoConfig cfg;
  cfg.epochs = 2;
  cfg.adam.learning_rate = 1e-2;
  Adam opt(m.num_params(), cfg.adam);
  Rng rng(6);
  for (int update = 0; update < 200; ++update) {
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 16; ++i) {
      const DecodeResult r = m.decide(x, DecodeMode::kSample, rng);
      Trajectory t;
      t.steps.push_back({x, r.tokens, r.log_prob, r.value, r.tokens[0] == target ? 1.0 : 0.0});
      trajs.push_back(std::move(t));
    }
    std::vector<Sample> samples = build_samples(trajs, cfg);
    normalize_advantages(samples);
    ppo_update(m, opt, samples, cfg, ExecutionMode::kSerial);
  }
  const double after = m.next_distribution(x, {})[target];
  MESSAGE("p(target) " << before << " -> " << after);
  CHECK(after > before);
  CHECK(after > 0.9);
}

TEST_CASE("behaviour cloning: a single example is memorised and the loss does not rise") {
  PolicyModel m = desk_model();
  const DialogueState s = some_states()[1];
  const std::vector<SemanticAct> acts = {SemanticAct::recommend("restaurant", "name", "x"),
                                         SemanticAct::inform("restaurant", "area", "y")};
  const BcExample ex{featurize(s, desk()), encode_decision(m, acts, Conduct::kApologetic)};
  BcConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 1;
  cfg.learning_rate = 1e-2;
  const std::vector<BcExample> corpus = {ex};
  const std::vector<double> losses = clone_behavior(m, corpus, cfg, ExecutionMode::kSerial);
  REQUIRE(losses.size() == 150);
  for (double l : losses) CHECK(l <= losses.front() + 1e-12);
  Rng rng(0);
  CHECK(m.decide(ex.features, DecodeMode::kGreedy, rng).tokens == ex.tokens);
}

TEST_CASE("behaviour cloning: out-of-vocabulary acts are reported") {
  const PolicyModel m = desk_model();
  const std::vector<SemanticAct> acts = {SemanticAct::inform("restaurant", "food", "thai"),
                                         SemanticAct::inform("taxi", "leave", "10:00")};
  try {
    encode_decision(m, acts, Conduct::kNeutral);
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("taxi") != std::string::npos);
  }
  PolicyModel copy = m;
  CHECK_THROWS_AS(clone_behavior(copy, std::vector<BcExample>{}, BcConfig{}), IngestionError);
}

TEST_CASE("behaviour cloning: conduct marginal of the corpus is reproduced") {
  TrainConfig tc;
  const Modules mods = make_modules(tc, desk());
  PolicyModel m = make_policy(tc, desk(), 5);
  const std::vector<BcExample> corpus =
      operator_corpus(m, mods, 31, 300, 0.3, tc.goals, ExecutionMode::kParallel);
  const std::vector<double> losses = clone_behavior(m, corpus, tc.bc, ExecutionMode::kParallel);
  CHECK(losses.back() <= losses.front());
  std::array<double, kNumConducts> got{};
  Rng rng(12);
  const int reps = 4;
  for (int r = 0; r < reps; ++r)
    for (const auto& ex : corpus) got[index_of(m.decide(ex.features, DecodeMode::kSample, rng).conduct)] += 1.0;
  for (std::size_t k = 0; k < kNumConducts; ++k) {
    got[k] /= static_cast<double>(reps * corpus.size());
    MESSAGE(name_of(kAllConducts[k]) << ": " << got[k] << " vs " << kCorpusConductMarginal[k]);
    CHECK(std::abs(got[k] - kCorpusConductMarginal[k]) < 0.05);
  }
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  const PolicyModel m = desk_model();
  TrainConfig tc;
  tc.policy = m.config();
  const Modules mods = make_modules(tc, desk());
  const std::vector<BcExample> corpus = operator_corpus(m, mods, 3, 40, 0.3, tc.goals, ExecutionMode::kSerial);
  CHECK(bc_loss(m, corpus, ExecutionMode::kSerial) == bc_loss(m, corpus, ExecutionMode::kParallel));

  const NeuralPolicy pol(m, desk(), DecodeMode::kSample);
  const auto a = collect(pol, mods, 9, 0, 24, tc.goals, ExecutionMode::kSerial);
  const auto b = collect(pol, mods, 9, 0, 24, tc.goals, ExecutionMode::kParallel);
  std::vector<Trajectory> trajs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(Json(a[i].record) == Json(b[i].record));
    trajs.push_back(a[i].trajectory);
  }
  std::vector<Sample> samples = build_samples(trajs, tc.ppo);
  normalize_advantages(samples);
  const LossEval ls = ppo_loss(m, samples, tc.ppo, ExecutionMode::kSerial);
  const LossEval lp = ppo_loss(m, samples, tc.ppo, ExecutionMode::kParallel);
  CHECK(ls.total == lp.total);
  CHECK(ls.grad == lp.grad);

  PolicyModel s1 = m, p1 = m;
  BcConfig bc;
  bc.epochs = 2;
  CHECK(clone_behavior(s1, corpus, bc, ExecutionMode::kSerial) ==
        clone_behavior(p1, corpus, bc, ExecutionMode::kParallel));
  CHECK(s1.params() == p1.params());
}

TEST_CASE("restricted model is the emotion-free loop") {
  const PolicyModel full = desk_model();
  const PolicyModel simple = full.restricted(false, false);
  CHECK(simple.num_params() == full.num_params());
  const NeuralPolicy pol(simple, desk(), DecodeMode::kGreedy);
  for (DialogueState s : some_states()) {
    Rng r1(1), r2(1);
    s.perceived_emotion = UserEmotion::kAbusive;
    const Decision a = pol.decide(s, r1);
    s.perceived_emotion = UserEmotion::kSatisfied;
    const Decision b = pol.decide(s, r2);
    CHECK(a.tokens == b.tokens);
    CHECK(a.acts == b.acts);
    CHECK(a.conduct == Conduct::kNeutral);
    CHECK(a.tokens.back() == simple.vocab().stop());
  }
  TrainConfig tc;
  tc.ablation = AblationFlags::parse("none");
  const PolicyModel base = make_policy(tc, desk(), 2);
  CHECK_FALSE(base.config().emotion_in_state);
  CHECK_FALSE(base.config().conduct_output);
  CHECK(base.num_params() == make_policy(TrainConfig{}, desk(), 2).num_params());
}

TEST_CASE("checkpoint round trip keeps parameters and the config hash") {
  const PolicyModel m = desk_model(4);
  const auto path = std::filesystem::temp_directory_path() / "affectod_ckpt_test.json";
  save_checkpoint(path.string(), m, Json{{"note", "x"}});
  Json extra;
  const PolicyModel back = load_checkpoint(path.string(), Vocabulary(desk()), &extra);
  CHECK(back.params() == m.params());
  CHECK(back.config_hash() == m.config_hash());
  CHECK(extra.at("note") == "x");
  CHECK_THROWS_AS(load_checkpoint(path.string(), Vocabulary::toy(3)), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path.string(), Vocabulary(desk())), ConfigError);
}
