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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "affectod/errors.h"
#include "affectod/metrics.h"
#include "affectod/nlg.h"
#include "affectod/trainer.h"
#include "doctest.h"
#include "support.h"

using namespace affectod;
using affectod::testing::desk;
using affectod::testing::load_fixture;

namespace {

int polarity(UserEmotion e) {
  static const std::map<UserEmotion, int> table = {
      {UserEmotion::kNeutral, 0},      {UserEmotion::kSatisfied, 1}, {UserEmotion::kDissatisfied, -1},
      {UserEmotion::kExcited, 1},      {UserEmotion::kFearful, -1},  {UserEmotion::kApologetic, 0},
      {UserEmotion::kAbusive, -1}};
  return table.at(e);
}

EpisodeRecord episode_of(std::vector<UserEmotion> perceived) {
  EpisodeRecord ep;
  for (std::size_t i = 0; i < perceived.size(); ++i) {
    Turn t;
    t.index = static_cast<int>(i);
    t.perceived_emotion = perceived[i];
    ep.turns.push_back(t);
  }
  return ep;
}

std::vector<EpisodeRecord> random_episodes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EpisodeRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    EpisodeRecord ep;
    const std::size_t len = 1 + rng.below(20);
    for (std::size_t k = 0; k < len; ++k) {
      Turn t;
      t.index = static_cast<int>(k);
      t.perceived_emotion = kAllEmotions[rng.below(kNumEmotions)];
      t.true_emotion = kAllEmotions[rng.below(kNumEmotions)];
      ep.turns.push_back(t);
    }
    ep.outcome.success = rng.bernoulli(0.6);
    ep.outcome.inform = ep.outcome.success || rng.bernoulli(0.5);
    ep.outcome.total_return = rng.uniform() * 100 - 50;
    out.push_back(ep);
  }
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TEST_CASE("sentiment polarity table") {
  for (UserEmotion e : kAllEmotions) CHECK(sentiment_of(e) == polarity(e));
  CHECK(sentiment_of(UserEmotion::kSatisfied) == 1);
  CHECK(sentiment_of(UserEmotion::kNeutral) == 0);
  CHECK(sentiment_of(UserEmotion::kAbusive) == -1);
}

TEST_CASE("mean sentiment: examples and an independent recount") {
  using E = UserEmotion;
  CHECK(mean_sentiment(std::vector{episode_of({E::kNeutral, E::kNeutral})}) == 0.0);
  CHECK(mean_sentiment(std::vector{episode_of({E::kSatisfied, E::kNeutral, E::kDissatisfied})}) == 0.0);
  CHECK_THROWS_AS(mean_sentiment(std::vector<EpisodeRecord>{}), MetricError);
  CHECK_THROWS_AS(mean_sentiment(std::vector{EpisodeRecord{}}), MetricError);

  const auto eps = random_episodes(200, 17);
  for (EmotionSource src : {EmotionSource::kPerceived, EmotionSource::kTrue}) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& ep : eps)
      for (const auto& t : ep.turns) {
        sum += polarity(src == EmotionSource::kTrue ? t.true_emotion : t.perceived_emotion);
        ++n;
      }
    CHECK(std::abs(mean_sentiment(eps, src) - sum / static_cast<double>(n)) <= 1e-12);
  }
}

TEST_CASE("sentiment by turn: examples, recount and consistency") {
  using E = UserEmotion;
  const auto one = sentiment_by_turn(std::vector{episode_of({E::kNeutral, E::kSatisfied})});
  CHECK(one == std::vector<TurnSentiment>{{0, 0.0, 1}, {1, 1.0, 1}});

  // buckets past the shorter dialogue only count the longer one
  const auto g = sentiment_by_turn(std::vector{episode_of({E::kAbusive}), episode_of({E::kSatisfied, E::kFearful, E::kExcited})});
  CHECK(g == std::vector<TurnSentiment>{{0, 0.0, 2}, {1, -1.0, 1}, {2, 1.0, 1}});
  CHECK(sentiment_by_turn(std::vector<EpisodeRecord>{}).empty());

  const auto eps = random_episodes(50, 3);
  std::map<int, std::pair<long, std::size_t>> tally;
  for (const auto& ep : eps)
    for (const auto& t : ep.turns) {
      tally[t.index].first += polarity(t.perceived_emotion);
      tally[t.index].second += 1;
    }
  const auto series = sentiment_by_turn(eps);
  REQUIRE(series.size() == tally.size());
  double weighted = 0;
  std::size_t total = 0;
  std::size_t i = 0;
  for (const auto& [turn, st] : tally) {
    CHECK(series[i].turn == turn);
    CHECK(series[i].count == st.second);
    CHECK(series[i].mean == static_cast<double>(st.first) / static_cast<double>(st.second));
    weighted += series[i].mean * static_cast<double>(series[i].count);
    total += series[i].count;
    ++i;
  }
  CHECK(weighted / static_cast<double>(total) == doctest::Approx(mean_sentiment(eps)).epsilon(1e-12));
}

TEST_CASE("sentiment progression splits each dialogue into thirds") {
  using E = UserEmotion;
  // six turns: 0,1 first third; 4,5 final third
  const auto p = sentiment_progression(std::vector{episode_of(
      {E::kDissatisfied, E::kNeutral, E::kNeutral, E::kNeutral, E::kSatisfied, E::kSatisfied})});
  CHECK(p.first_third == -0.5);
  CHECK(p.final_third == 1.0);
  CHECK(p.first_count == 2);
  CHECK(p.final_count == 2);
  CHECK(p.gain() == 1.5);
  // a single turn sits in the first third only
  const auto q = sentiment_progression(std::vector{episode_of({E::kSatisfied})});
  CHECK(q.first_count == 1);
  CHECK(q.final_count == 0);
}

TEST_CASE("hallucination: 40 hand-labelled turns") {
  const Json turns = load_fixture("hallucination_turns.json").at("turns");
  REQUIRE(turns.size() == 40);
  EpisodeRecord ep;
  std::size_t labelled = 0;
  for (const auto& t : turns) {
    const auto acts = t.at("acts").get<std::vector<SemanticAct>>();
    const std::string text = t.at("utterance");
    INFO(t.at("id").get<std::string>());
    CHECK(turn_hallucinates(text, acts, desk()) == t.at("hallucinated").get<bool>());
    std::vector<std::string> vals;
    for (const auto& s : unlicensed_values(text, acts, desk(), true)) vals.push_back(s.value);
    CHECK(vals == t.at("unlicensed").get<std::vector<std::string>>());
    labelled += t.at("hallucinated").get<bool>() ? 1 : 0;
    Turn turn;
    turn.index = static_cast<int>(ep.turns.size());
    turn.system_acts = acts;
    turn.system_utterance = text;
    ep.turns.push_back(turn);
  }
  const HallucinationReport r = hallucination_rate(std::vector{ep}, desk());
  CHECK(r.system_turns == 40);
  CHECK(r.hallucinating == labelled);
  CHECK(r.rate == doctest::Approx(static_cast<double>(labelled) / 40.0));
  const std::string phone = desk().entities("restaurant")[0].at("phone");
  CHECK(turn_hallucinates("phone is " + phone, std::vector{SemanticAct::request("restaurant", "area")}, desk()));
  CHECK_FALSE(turn_hallucinates("phone is " + phone, std::vector{SemanticAct::inform("restaurant", "phone", phone)}, desk()));
}

TEST_CASE("hallucination: engine dialogues are clean and injected values are always caught") {
  TrainConfig tc;
  const Modules m = make_modules(tc, desk());
  const RulePolicy op(desk(), {.noise = 0.3, .conduct_marginal = kCorpusConductMarginal});
  std::vector<EpisodeRecord> eps;
  for (auto& r : collect(op, m, 5, 0, 100, tc.goals, ExecutionMode::kSerial)) eps.push_back(r.record);
  const HallucinationReport clean = hallucination_rate(eps, desk());
  CHECK(clean.system_turns > 0);
  CHECK(clean.rate == 0.0);

  Rng rng(8);
  const auto& known = desk().known_values();
  std::size_t injected = 0, caught = 0;
  for (auto& ep : eps)
    for (auto& t : ep.turns) {
      if (!t.has_system_response()) continue;
      const KnownValue& kv = known[rng.below(known.size())];
      bool licensed = false;
      for (const auto& a : t.system_acts) licensed = licensed || (a.value && lower(*a.value) == kv.value);
      if (licensed) continue;
      t.system_utterance += " It is also " + kv.value + ".";
      ++injected;
      caught += turn_hallucinates(t.system_utterance, t.system_acts, desk()) ? 1 : 0;
    }
  CHECK(injected > 100);
  CHECK(caught == injected);
}

TEST_CASE("hallucination: adding a licensing act never raises the rate") {
  const Json turns = load_fixture("hallucination_turns.json").at("turns");
  for (const auto& t : turns) {
    auto acts = t.at("acts").get<std::vector<SemanticAct>>();
    const std::string text = t.at("utterance");
    const auto before = unlicensed_values(text, acts, desk(), true);
    for (const auto& s : before) {
      const auto& kv = *std::find_if(desk().known_values().begin(), desk().known_values().end(),
                                     [&](const KnownValue& k) { return k.value == s.value; });
      const std::string& slot = *kv.slots.begin();
      std::string domain = "restaurant";
      for (const auto& d : desk().domains())
        if (d.is_informable(slot) || d.is_requestable(slot)) {
          domain = d.name;
          break;
        }
      acts.push_back(SemanticAct::inform(domain, slot, s.value));
      const bool was = turn_hallucinates(text, std::span(acts).first(acts.size() - 1), desk());
      CHECK(turn_hallucinates(text, acts, desk()) <= was);
    }
    CHECK_FALSE(turn_hallucinates(text, acts, desk()));
  }
}

TEST_CASE("macro F1") {
  const std::vector<std::string> labels = {"a", "b"};
  CHECK(macro_f1(std::vector<std::string>{"a", "b", "a"}, std::vector<std::string>{"a", "b", "a"}, labels) == 1.0);
  // label a: TP=1 FP=1 FN=1; label b: perfect
  const std::vector<std::string> gold = {"a", "a", "c", "b", "b"};
  const std::vector<std::string> pred = {"a", "c", "a", "b", "b"};
  CHECK(macro_f1(pred, gold, std::vector<std::string>{"a", "b"}) == doctest::Approx(0.75));
  CHECK(macro_f1(std::vector<std::string>{"b", "b"}, std::vector<std::string>{"a", "a"},
                 std::vector<std::string>{"a"}) == 0.0);
  CHECK(macro_f1(std::vector<std::string>{"a"}, std::vector<std::string>{"a"}, std::vector<std::string>{"a", "z"}) == 1.0);
  CHECK(macro_f1(std::vector<std::string>{"a"}, std::vector<std::string>{"a"}, std::vector<std::string>{"a", "z"},
                 false) == 0.5);
  CHECK_THROWS_AS(macro_f1(std::vector<std::string>{"a"}, std::vector<std::string>{"a", "b"}, labels), MetricError);
}

TEST_CASE("paired bootstrap: degenerate cases and errors") {
  const std::vector<double> a(100, 1.0), b(100, 0.0);
  const SignificanceResult sep = paired_bootstrap(a, b);
  CHECK(sep.significant);
  CHECK(sep.p_value < 0.001);
  CHECK(sep.delta == 1.0);
  Rng rng(2);
  std::vector<double> x(60);
  for (double& v : x) v = rng.uniform();
  const SignificanceResult same = paired_bootstrap(x, x);
  CHECK_FALSE(same.significant);
  CHECK(same.p_value == 1.0);
  CHECK_THROWS_AS(paired_bootstrap(std::vector<double>(10, 1.0), std::vector<double>(10, 0.0)), MetricError);
  CHECK_THROWS_AS(paired_bootstrap(std::vector<double>(40, 1.0), std::vector<double>(41, 0.0)), MetricError);
}

TEST_CASE("paired bootstrap: false rejection rate near 0.05 on i.i.d. samples") {
  Rng rng(99);
  const int trials = 500;
  int rejected = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(60), b(60);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform() + rng.uniform();
      b[i] = rng.uniform() + rng.uniform();
    }
    rejected += paired_bootstrap(a, b, 0.05, 10000, 1000 + t).significant ? 1 : 0;
  }
  const double rate = rejected / static_cast<double>(trials);
  MESSAGE("rejection rate " << rate);
  CHECK(std::abs(rate - 0.05) <= 0.02);
}

TEST_CASE("metric report recounts the episodes and skips aborted ones") {
  auto eps = random_episodes(80, 21);
  eps[3].aborted = true;
  eps[3].outcome.success = true;
  const MetricReport r = build_report(eps, desk());
  double succ = 0, inform = 0, ret = 0;
  std::vector<EpisodeRecord> kept;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (i == 3) continue;
    succ += eps[i].outcome.success;
    inform += eps[i].outcome.inform;
    ret += eps[i].outcome.total_return;
    kept.push_back(eps[i]);
  }
  CHECK(r.episodes == 79);
  CHECK(r.success_rate == doctest::Approx(succ / 79));
  CHECK(r.inform_rate == doctest::Approx(inform / 79));
  CHECK(r.mean_return == doctest::Approx(ret / 79));
  CHECK(r.mean_sentiment == doctest::Approx(mean_sentiment(kept)));
  CHECK(r.mean_true_sentiment == doctest::Approx(mean_sentiment(kept, EmotionSource::kTrue)));
  CHECK(r.success_ci.lo <= r.success_rate);
  CHECK(r.success_ci.hi >= r.success_rate);
  CHECK(r.sentiment_by_turn.size() <= 20);
  const Json j = report_to_json(r);
  CHECK(report_to_json(build_report(eps, desk())) == j);
  for (const char* k : {"success_rate", "inform_rate", "mean_sentiment", "hallucination_rate", "sentiment_by_turn"})
    CHECK(j.contains(k));
  CHECK(report_table(r).find("Success") != std::string::npos);
}
