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

#include <set>

#include "affectod/episode.h"
#include "affectod/errors.h"
#include "affectod/goal.h"
#include "affectod/outcome.h"
#include "doctest.h"
#include "outcome_oracle.h"
#include "support.h"

using namespace affectod;
using affectod::testing::desk;
using affectod::testing::fits;
using affectod::testing::oracle;
using affectod::testing::reference_of;

namespace {

std::vector<Turn> turns_of(const Json& j) {
  std::vector<Turn> out;
  for (const auto& t : j) {
    Turn turn;
    turn.index = t.at("index");
    turn.system_acts = t.at("system_acts").get<std::vector<SemanticAct>>();
    out.push_back(turn);
  }
  return out;
}

}  // namespace

TEST_CASE("label names round-trip and unknown names are rejected") {
  for (auto e : kAllEmotions) CHECK(parse_emotion(name_of(e)) == e);
  for (auto c : kAllConducts) CHECK(parse_conduct(name_of(c)) == c);
  for (auto i : kAllIntents) CHECK(parse_intent(name_of(i)) == i);
  CHECK(parse_emotion("SATISFIED") == UserEmotion::kSatisfied);
  CHECK_THROWS_AS(parse_emotion("angry"), std::invalid_argument);
  CHECK_THROWS_AS(parse_conduct(""), std::invalid_argument);
}

TEST_CASE("semantic act shapes") {
  CHECK(has_valid_shape(SemanticAct::inform("hotel", "area", "north")));
  CHECK(has_valid_shape(SemanticAct::request("hotel", "phone")));
  CHECK(has_valid_shape(SemanticAct::no_offer("hotel")));
  CHECK(has_valid_shape(SemanticAct::bye()));
  CHECK(has_valid_shape(SemanticAct::booked("hotel", "ABCD")));
  CHECK_FALSE(has_valid_shape({Intent::kInform, "hotel", "area", std::nullopt}));
  CHECK_FALSE(has_valid_shape({Intent::kRequest, "hotel", "area", "north"}));
  CHECK_FALSE(has_valid_shape({Intent::kNoOffer, "hotel", "area", std::nullopt}));
  CHECK_FALSE(has_valid_shape({Intent::kBye, "general", std::nullopt, "x"}));
  std::string why;
  CHECK_FALSE(has_valid_shape({Intent::kConfirm, "hotel", std::nullopt, std::nullopt}, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("desk ontology sizes and invariants") {
  const Ontology& o = desk();
  REQUIRE(o.domains().size() == 3);
  for (const auto& d : o.domains()) {
    CHECK(d.informable.size() >= 4);
    CHECK(d.informable.size() <= 6);
    const auto& es = o.entities(d.name);
    CHECK(es.size() >= 30);
    CHECK(es.size() <= 60);
    std::set<std::string> names;
    for (const auto& e : es) {
      names.insert(e.at("name"));
      for (const auto& [slot, values] : d.informable)
        CHECK(std::find(values.begin(), values.end(), e.at(slot)) != values.end());
    }
    CHECK(names.size() == es.size());
  }
}

TEST_CASE("ontology constructor rejects broken schemas") {
  DomainSchema d;
  d.name = "shop";
  d.informable = {{"name", {"a", "b"}}, {"area", {"north"}}};
  d.requestable = {"phone"};
  Entity ok{{"name", "a"}, {"area", "north"}, {"phone", "1"}};
  CHECK_NOTHROW(Ontology({d}, {{"shop", {ok}}}));

  Entity outside = ok;
  outside["area"] = "south";
  CHECK_THROWS_AS(Ontology({d}, {{"shop", {outside}}}), ConfigError);
  CHECK_THROWS_AS(Ontology({d}, {{"shop", {}}}), ConfigError);
  CHECK_THROWS_AS(Ontology({d, d}, {{"shop", {ok}}}), ConfigError);
}

TEST_CASE("ontology JSON round trip preserves schema and database") {
  const Ontology back = ontology_from_json(ontology_to_json(desk()));
  CHECK(ontology_to_json(back) == ontology_to_json(desk()));
  for (const auto& d : desk().domains()) CHECK(back.entities(d.name) == desk().entities(d.name));
}

TEST_CASE("shipped ontology file equals the built-in one") {
  CHECK(ontology_to_json(load_ontology(std::string(AFFECTOD_DATA_DIR) + "/ontology.json")) ==
        ontology_to_json(desk()));
}

TEST_CASE("sample_goal: single domain when multi-domain probability is zero") {
  GoalConfig cfg;
  cfg.multi_domain_probability = 0.0;
  Rng rng(3);
  for (int i = 0; i < 500; ++i) CHECK(sample_goal(desk(), rng, cfg).domains.size() == 1);
}

TEST_CASE("sample_goal: unsatisfiable goals match nothing, checked by scanning the database") {
  GoalConfig cfg;
  cfg.unsatisfiable_probability = 1.0;
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const UserGoal g = sample_goal(desk(), rng, cfg);
    REQUIRE(g.unsatisfiable());
    int unsat_domains = 0;
    for (const auto& dg : g.domains) {
      std::size_t hits = 0;
      for (const Entity& e : desk().entities(dg.domain)) hits += fits(e, dg.constraints) ? 1 : 0;
      if (dg.alternative) {
        ++unsat_domains;
        CHECK(hits == 0);
        std::size_t alt_hits = 0;
        for (const Entity& e : desk().entities(dg.domain)) alt_hits += fits(e, *dg.alternative) ? 1 : 0;
        CHECK(alt_hits > 0);
      } else {
        CHECK(hits > 0);
      }
    }
    CHECK(unsat_domains == 1);
  }
}

TEST_CASE("sample_goal: schema validity, determinism and configuration errors") {
  Rng a(11), b(11);
  for (int i = 0; i < 1000; ++i) {
    const UserGoal g = sample_goal(desk(), a, {});
    CHECK_NOTHROW(validate_goal(g, desk()));
    CHECK(!g.domains.empty());
    for (const auto& dg : g.domains) CHECK(!dg.constraints.empty());
    CHECK(g == sample_goal(desk(), b, {}));
  }
  Rng rng(1);
  CHECK_THROWS_AS(sample_goal(Ontology{}, rng, {}), ConfigError);
  GoalConfig bad;
  bad.unsatisfiable_probability = 1.5;
  CHECK_THROWS_AS(sample_goal(desk(), rng, bad), ConfigError);

  UserGoal broken;
  broken.domains.push_back({"hotel", {{"phone", "1"}}, std::nullopt, {}, {}});
  CHECK_THROWS_AS(validate_goal(broken, desk()), ConfigError);
  broken.domains[0] = {"hotel", {{"area", "north"}}, std::nullopt, {"stars"}, {}};
  CHECK_THROWS_AS(validate_goal(broken, desk()), ConfigError);
}

TEST_CASE("goal text lists constraints and requests") {
  Rng rng(2);
  const UserGoal g = sample_goal(desk(), rng, {});
  const std::string text = render_goal_text(g);
  for (const auto& dg : g.domains) {
    CHECK(text.find(dg.domain) != std::string::npos);
    for (const auto& [slot, value] : dg.constraints)
      if (value != kDontCare) CHECK(text.find(value) != std::string::npos);
  }
}

TEST_CASE("outcome: 20 handcrafted episodes agree with the brute-force checker and hand labels") {
  const Json fx = affectod::testing::load_fixture("outcome_episodes.json");
  REQUIRE(fx.at("episodes").size() == 20);
  for (const auto& ep : fx.at("episodes")) {
    CAPTURE(ep.at("id").get<std::string>());
    const UserGoal goal = ep.at("goal").get<UserGoal>();
    const auto turns = turns_of(ep.at("turns"));
    const Verdict engine = judge_outcome(goal, turns, desk());
    const Verdict brute = oracle(goal, turns, desk());
    const Verdict hand{ep["expected"]["success"].get<bool>(), ep["expected"]["inform"].get<bool>()};
    CHECK(engine == brute);
    CHECK(engine == hand);
  }
}

TEST_CASE("outcome: success implies inform and judging is pure on random act streams") {
  Rng rng(17);
  const Ontology& o = desk();
  for (int n = 0; n < 400; ++n) {
    const UserGoal goal = sample_goal(o, rng, {});
    std::vector<Turn> turns(1 + rng.below(4));
    for (auto& t : turns)
      for (const auto& dg : goal.domains) {
        const auto& es = o.entities(dg.domain);
        const Entity& e = es[rng.below(es.size())];
        if (rng.bernoulli(0.7)) t.system_acts.push_back(SemanticAct::recommend(dg.domain, "name", e.at("name")));
        for (const auto& r : dg.requests)
          if (rng.bernoulli(0.6)) t.system_acts.push_back(SemanticAct::inform(dg.domain, r, e.at(r)));
        if (rng.bernoulli(0.3))
          t.system_acts.push_back(SemanticAct::booked(dg.domain, reference_of(dg.domain, e.at("name"))));
      }
    const Verdict v = judge_outcome(goal, turns, o);
    if (v.success) CHECK(v.inform);
    CHECK(v == judge_outcome(goal, turns, o));
    CHECK(v == oracle(goal, turns, o));
  }
}

TEST_CASE("booking references are recomputable from the entity name") {
  for (const auto& d : desk().domains())
    for (std::size_t i = 0; i < desk().entities(d.name).size(); ++i) {
      const std::string ref = desk().booking_reference(d.name, i);
      CHECK(ref == reference_of(d.name, desk().entities(d.name)[i].at("name")));
      CHECK(desk().entity_for_reference(d.name, ref) == i);
    }
}

TEST_CASE("episode record JSON round trip") {
  EpisodeRecord e;
  Rng rng(4);
  e.goal = sample_goal(desk(), rng, {});
  e.seed = 99;
  e.checkpoint_id = "ckpt_000500";
  e.config_hash = "abc";
  Turn t;
  t.index = 0;
  t.user_utterance = "i want a cheap hotel";
  t.user_acts = {SemanticAct::inform("hotel", "pricerange", "cheap")};
  t.true_emotion = UserEmotion::kExcited;
  t.perceived_emotion = UserEmotion::kNeutral;
  t.perceived_confidence = 0.25;
  t.system_acts = {SemanticAct::request("hotel", "area")};
  t.conduct = Conduct::kEnthusiastic;
  t.system_utterance = "which area?";
  t.reward = RewardBreakdown{-1.0, -2.0};
  e.turns = {t};
  e.outcome = {false, false, -3.0};
  const EpisodeRecord back = Json(e).get<EpisodeRecord>();
  CHECK(back == e);
}
