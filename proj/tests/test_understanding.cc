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

#include "affectod/errors.h"
#include "affectod/erc.h"
#include "affectod/state.h"
#include "affectod/trainer.h"
#include "doctest.h"
#include "support.h"

using namespace affectod;
using affectod::testing::desk;

namespace {

std::size_t count_by_scan(const std::string& domain, const Constraints& c) {
  std::size_t n = 0;
  for (const Entity& e : desk().entities(domain)) {
    bool ok = true;
    for (const auto& [slot, value] : c) ok = ok && e.at(slot) == value;
    n += ok ? 1 : 0;
  }
  return n;
}

ErcResult read(std::string_view text, const NoiseChannel& ch = NoiseChannel::identity(),
               const std::deque<std::string>& history = {}, ErcConfig cfg = {}) {
  Rng rng(1);
  return recognize_emotion(text, history, DialogueState::initial(desk()), CueLexicon::defaults(), ch,
                           cfg, rng);
}

}  // namespace

TEST_CASE("initial state is empty with neutral perceived emotion") {
  const DialogueState s = DialogueState::initial(desk());
  CHECK(s.domains.size() == desk().domains().size());
  CHECK(s.perceived_emotion == UserEmotion::kNeutral);
  for (const auto& d : s.domains) {
    CHECK(d.constraints.empty());
    CHECK(d.requested.empty());
    CHECK_FALSE(d.booking_requested);
  }
}

TEST_CASE("track: inform sets the constraint and the match count equals a database scan") {
  const SemanticAct a = SemanticAct::inform("restaurant", "food", "italian");
  const DialogueState s = track(DialogueState::initial(desk()), std::span(&a, 1), desk());
  const DomainState& r = s.at(desk(), "restaurant");
  CHECK(r.constraints == Constraints{{"food", "italian"}});
  CHECK(r.match_count == count_by_scan("restaurant", {{"food", "italian"}}));
  CHECK(s.active_domain == "restaurant");
}

TEST_CASE("track: match counts follow every constraint combination") {
  const auto& schema = desk().domain("hotel");
  for (const auto& area : schema.informable.at("area"))
    for (const auto& price : schema.informable.at("pricerange")) {
      const std::vector<SemanticAct> acts = {SemanticAct::inform("hotel", "area", area),
                                             SemanticAct::inform("hotel", "pricerange", price)};
      const DialogueState s = track(DialogueState::initial(desk()), acts, desk());
      const std::size_t n = count_by_scan("hotel", {{"area", area}, {"pricerange", price}});
      CHECK(s.at(desk(), "hotel").match_count == n);
      CHECK(bucket_of(n) == (n == 0 ? MatchBucket::kNone
                             : n == 1 ? MatchBucket::kOne
                             : n <= 4 ? MatchBucket::kFew
                                      : MatchBucket::kMany));
    }
}

TEST_CASE("track: empty input is the identity and last write wins") {
  DialogueState s = DialogueState::initial(desk());
  const SemanticAct it = SemanticAct::inform("restaurant", "food", "italian");
  s = track(s, std::span(&it, 1), desk());
  CHECK(track(s, {}, desk()) == s);
  const SemanticAct cn = SemanticAct::inform("restaurant", "food", "chinese");
  s = track(s, std::span(&cn, 1), desk());
  CHECK(s.at(desk(), "restaurant").constraints.at("food") == "chinese");
}

TEST_CASE("track: requests become outstanding and booking is flagged") {
  const std::vector<SemanticAct> acts = {SemanticAct::request("hotel", "phone"), SemanticAct::book("hotel"),
                                         SemanticAct::inform("hotel", "people", "2")};
  const DialogueState s = track(DialogueState::initial(desk()), acts, desk());
  const DomainState& h = s.at(desk(), "hotel");
  CHECK(h.requested.count("phone") == 1);
  CHECK(h.booking_requested);
  CHECK(h.booking_info.at("people") == "2");
}

TEST_CASE("track: unknown domain or slot is rejected and nothing changes") {
  const DialogueState s = DialogueState::initial(desk());
  const std::vector<SemanticAct> bad_domain = {SemanticAct::inform("restaurant", "food", "thai"),
                                               SemanticAct::inform("taxi", "leave", "10:00")};
  CHECK_THROWS_AS(track(s, bad_domain, desk()), TrackingError);
  const std::vector<SemanticAct> bad_slot = {SemanticAct::inform("hotel", "colour", "red")};
  CHECK_THROWS_AS(track(s, bad_slot, desk()), TrackingError);
  CHECK(s == DialogueState::initial(desk()));
}

TEST_CASE("track: repeated identical user acts are counted") {
  const std::vector<SemanticAct> acts = {SemanticAct::request("hotel", "phone")};
  DialogueState s = track(DialogueState::initial(desk()), acts, desk());
  CHECK(s.user_repeats == 0);
  s = track(s, acts, desk());
  CHECK(s.user_repeats == 1);
  s = track(s, acts, desk());
  CHECK(s.user_repeats == 2);
  const std::vector<SemanticAct> other = {SemanticAct::request("hotel", "address")};
  CHECK(track(s, other, desk()).user_repeats == 0);
}

TEST_CASE("apply_system_acts clears answered requests and remembers offers") {
  std::vector<SemanticAct> user = {SemanticAct::inform("hotel", "area", "north"),
                                   SemanticAct::request("hotel", "phone")};
  DialogueState s = track(DialogueState::initial(desk()), user, desk());
  const std::vector<SemanticAct> sys = {SemanticAct::recommend("hotel", "name", "birch inn"),
                                        SemanticAct::inform("hotel", "phone", "01223386194")};
  apply_system_acts(s, sys, desk());
  CHECK(s.at(desk(), "hotel").requested.empty());
  REQUIRE(s.at(desk(), "hotel").offered.has_value());
  CHECK(desk().entities("hotel")[*s.at(desk(), "hotel").offered].at("name") == "birch inn");
  CHECK(s.last_system_acts == sys);
}

TEST_CASE("history keeps the last three utterances") {
  DialogueState s = DialogueState::initial(desk());
  for (const char* u : {"a", "b", "c", "d"}) push_history(s, u);
  CHECK(s.history == std::deque<std::string>{"b", "c", "d"});
}

TEST_CASE("recognize_emotion: cue lookup with the identity channel") {
  const ErcResult r = read("Sorry, my mistake, I meant the north.");
  CHECK(r.label == UserEmotion::kApologetic);
  CHECK(r.confidence == doctest::Approx(1.0));
  CHECK(read("I want a cheap hotel.").label == UserEmotion::kNeutral);
  CHECK(read("That's perfect, thanks a lot!").label == UserEmotion::kSatisfied);
  CHECK(read("You are completely useless.").label == UserEmotion::kAbusive);
  CHECK(read("Oh no, I'm worried about this.").label == UserEmotion::kFearful);
  CHECK(read("I'm so excited to see it").label == UserEmotion::kExcited);
  CHECK(read("This is frustrating").label == UserEmotion::kDissatisfied);
  // word boundaries: "perfectly" carries no cue
  CHECK(read("it is perfectly located").label == UserEmotion::kNeutral);
}

TEST_CASE("recognize_emotion: empty utterance is rejected") {
  CHECK_THROWS_AS(read(""), std::invalid_argument);
}

TEST_CASE("recognize_emotion: repetition prior reads a verbatim repeat as dissatisfied") {
  const std::deque<std::string> h = {"I want the phone number.", "which area?"};
  ErcConfig on{.repetition_prior = true};
  CHECK(read("i want the phone number", NoiseChannel::identity(), h, on).label == UserEmotion::kDissatisfied);
  CHECK(read("i want the phone number", NoiseChannel::identity(), h, {}).label == UserEmotion::kNeutral);
  CHECK(read("i want the address", NoiseChannel::identity(), h, on).label == UserEmotion::kNeutral);
}

TEST_CASE("noise channel: rows are stochastic and malformed matrices are rejected") {
  for (double p : {0.0, 0.1, 0.5, 1.0}) {
    const NoiseChannel ch = NoiseChannel::uniform_flip(p);
    for (auto from : kAllEmotions) {
      double sum = 0.0;
      for (auto to : kAllEmotions) sum += ch.prob(from, to);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(ch.prob(from, from) == doctest::Approx(1.0 - p));
    }
  }
  NoiseChannel::Matrix m{};
  for (std::size_t i = 0; i < kNumEmotions; ++i) m[i][i] = 1.0;
  m[2][2] = 0.9;
  CHECK_THROWS_AS(NoiseChannel{m}, ConfigError);
  m[2][3] = 0.1;
  CHECK_NOTHROW(NoiseChannel{m});
  m[2][3] = -0.1;
  m[2][2] = 1.1;
  CHECK_THROWS_AS(NoiseChannel{m}, ConfigError);
}

TEST_CASE("noise channel: 1e5 draws reproduce the matrix row within 0.01") {
  NoiseChannel::Matrix m{};
  for (std::size_t i = 0; i < kNumEmotions; ++i) m[i][i] = 1.0;
  m[index_of(UserEmotion::kSatisfied)] = {0.05, 0.6, 0.1, 0.15, 0.0, 0.02, 0.08};
  const NoiseChannel ch(m);
  Rng rng(123);
  std::array<int, kNumEmotions> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const ErcResult r = recognize_emotion("That's perfect", {}, DialogueState::initial(desk()),
                                          CueLexicon::defaults(), ch, {}, rng);
    ++counts[index_of(r.label)];
    if (r.confidence != ch.prob(UserEmotion::kSatisfied, r.label)) FAIL("confidence is not the channel probability");
  }
  for (std::size_t j = 0; j < kNumEmotions; ++j)
    CHECK(std::abs(counts[j] / static_cast<double>(n) - m[index_of(UserEmotion::kSatisfied)][j]) < 0.01);
}

TEST_CASE("noise channel and cue lexicon JSON round trips") {
  const NoiseChannel ch = NoiseChannel::uniform_flip(0.2);
  CHECK(noise_channel_from_json(noise_channel_to_json(ch)).matrix() == ch.matrix());
  const CueLexicon l = CueLexicon::defaults();
  CHECK(cue_lexicon_from_json(cue_lexicon_to_json(l)).cues == l.cues);
  CHECK(noise_channel_from_json(read_json_file(std::string(AFFECTOD_DATA_DIR) + "/noise.json")).matrix() ==
        NoiseChannel::uniform_flip(0.1).matrix());
}

TEST_CASE("closed loop: identity channel recovers the simulator's emotion on every turn") {
  TrainConfig cfg;
  Modules m = make_modules(cfg, desk());
  m.noise = NoiseChannel::identity();
  m.personas.expressiveness = {{1.0, 1.0}};
  const RulePolicy op(desk(), {.noise = 0.4, .conduct_marginal = kCorpusConductMarginal});
  std::size_t turns = 0;
  for (const auto& r : collect(op, m, 77, 0, 200, cfg.goals, ExecutionMode::kSerial)) {
    REQUIRE_FALSE(r.record.aborted);
    for (const auto& t : r.record.turns) {
      CHECK(t.perceived_emotion == t.true_emotion);
      ++turns;
    }
  }
  CHECK(turns > 600);
}
