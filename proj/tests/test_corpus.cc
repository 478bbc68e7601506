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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "affectod/corpus.h"
#include "affectod/errors.h"
#include "affectod/trainer.h"
#include "doctest.h"
#include "support.h"

using namespace affectod;
using affectod::testing::desk;
using affectod::testing::fixture;
namespace fs = std::filesystem;

namespace {

using Rows = std::vector<std::vector<std::size_t>>;

// Ten items, fourteen raters, five categories.
const Rows kWorked = {{0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0},
                      {2, 2, 8, 1, 1},  {7, 7, 0, 0, 0}, {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2},
                      {6, 5, 2, 1, 0},  {0, 2, 2, 3, 7}};

Rows expand(const Rows& counts) {
  Rows out;
  for (const auto& row : counts) {
    std::vector<std::size_t> labels;
    for (std::size_t c = 0; c < row.size(); ++c) labels.insert(labels.end(), row[c], c);
    out.push_back(labels);
  }
  return out;
}

std::size_t n(Conduct c) { return index_of(c); }

Vote label(std::size_t l) { return {Vote::Kind::kLabel, l}; }

fs::path write_tmp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("load_corpus: the three-dialogue fixture") {
  const auto corpus = load_corpus(fixture("corpus_three.json"));
  REQUIRE(corpus.size() == 3);
  CHECK(corpus[0].id == "MUL0001");
  CHECK(corpus[1].source == "multiwoz");
  CHECK(corpus[2].source == kDialMageSource);
  for (const auto& d : corpus)
    for (const auto& t : d.turns) {
      if (!t.auto_labeled) CHECK_FALSE(t.label.has_value());
      if (!t.annotations.empty()) CHECK(t.annotations.size() >= 3);
    }
  const AnnotatedTurn& auto_turn = corpus[2].turns[1];
  CHECK(auto_turn.auto_labeled);
  CHECK(auto_turn.label == n(Conduct::kNeutral));
  CHECK(corpus_from_json(corpus_to_json(corpus)) == corpus);
}

TEST_CASE("load_corpus: empty files, bare arrays and errors") {
  CHECK(load_corpus(write_tmp("affectod_empty.json", R"({"dialogues": []})").string()).empty());
  CHECK(corpus_from_json(Json::array()).empty());
  try {
    load_corpus("/nonexistent/corpus.json");
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/corpus.json") != std::string::npos);
  }
  const Json bad = Json::parse(R"({"dialogues": [{"dialogue_id": "X7", "turns": [
      {"speaker": "user", "utterance": "hi", "annotations": ["neutral", "neutral", "neutral"]},
      {"speaker": "system", "utterance": "hello", "annotations": ["neutral", "grumpy", "neutral"]}]}]})");
  try {
    corpus_from_json(bad);
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    const std::string what = e.what();
    CHECK(what.find("X7") != std::string::npos);
    CHECK(what.find("turns[1].annotations[1]") != std::string::npos);
    CHECK(what.find("grumpy") != std::string::npos);
  }
  const Json few = Json::parse(R"([{"dialogue_id": "F1", "turns": [
      {"speaker": "system", "utterance": "hello", "annotations": ["neutral"], "label": "neutral"}]}])");
  CHECK_THROWS_AS(corpus_from_json(few), IngestionError);
  CHECK_THROWS_AS(corpus_from_json(Json::parse(R"([{"dialogue_id": "S", "turns": [{"speaker": "bot", "utterance": "x"}]}])")),
                  IngestionError);
}

TEST_CASE("majority vote") {
  const std::size_t A = n(Conduct::kApologetic), N = n(Conduct::kNeutral), B = n(Conduct::kEnthusiastic),
                    C = n(Conduct::kCompassionate);
  CHECK(majority_vote(std::vector<std::size_t>{A, A, N}) == label(A));
  CHECK(majority_vote(std::vector<std::size_t>{A, B, C}).kind == Vote::Kind::kEscalate);
  CHECK(majority_vote(std::vector<std::size_t>{A, B, C, B}) == label(B));
  CHECK(majority_vote(std::vector<std::size_t>{A, B, A, B}).kind == Vote::Kind::kManual);
  CHECK_THROWS_AS(majority_vote(std::vector<std::size_t>{A, A}), AnnotationError);
}

TEST_CASE("majority vote ignores annotator order") {
  for (std::size_t len : {3u, 4u, 5u}) {
    std::vector<std::size_t> v(len, 0);
    // every label vector over three categories
    std::size_t combos = 1;
    for (std::size_t i = 0; i < len; ++i) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      std::size_t c = code;
      for (auto& x : v) {
        x = c % 3;
        c /= 3;
      }
      const Vote ref = majority_vote(v);
      std::vector<std::size_t> p = v;
      std::sort(p.begin(), p.end());
      do {
        CHECK(majority_vote(p) == ref);
      } while (std::next_permutation(p.begin(), p.end()));
    }
  }
}

TEST_CASE("aggregation fills labels by vote and counts escalations") {
  auto corpus = load_corpus(fixture("corpus_three.json"));
  const AggregationReport r = aggregate(corpus);
  CHECK(r.finalized == 7);
  CHECK(r.escalated == 2);
  CHECK(r.auto_labeled == 1);
  CHECK(corpus[0].turns[1].label == n(Conduct::kNeutral));
  CHECK(corpus[0].turns[3].label == n(Conduct::kAppreciative));
  CHECK(corpus[0].turns[2].label == index_of(UserEmotion::kSatisfied));
  CHECK_FALSE(corpus[1].turns[3].label.has_value());
  // a fourth annotator resolves the escalated system turn
  corpus[1].turns[3].annotations.push_back(n(Conduct::kApologetic));
  const AggregationReport again = aggregate(corpus);
  CHECK(again.finalized == 1);
  CHECK(corpus[1].turns[3].label == n(Conduct::kApologetic));
}

TEST_CASE("Fleiss kappa: worked example against a hand computation") {
  // P-bar = 688/1820, Pe = 4170/19600
  const double want = 4211.0 / 20059.0;
  const KappaResult k = fleiss_kappa_counts(kWorked);
  CHECK(std::abs(k.kappa - want) < 1e-6);
  CHECK(k.items == 10);
  CHECK(k.raters == 14);
  CHECK_FALSE(k.degenerate);
  CHECK(std::abs(fleiss_kappa(expand(kWorked), 5).kappa - want) < 1e-6);
}

TEST_CASE("Fleiss kappa: perfect agreement, degenerate input and errors") {
  const Rows perfect = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {1, 1, 1}};
  CHECK(fleiss_kappa(perfect, 3).kappa == 1.0);
  const KappaResult d = fleiss_kappa(Rows{{1, 1, 1}, {1, 1, 1}}, 3);
  CHECK(d.degenerate);
  CHECK(std::isnan(d.kappa));
  CHECK_THROWS_AS(fleiss_kappa(Rows{}, 3), AnnotationError);
  CHECK_THROWS_AS(fleiss_kappa(Rows{{0}, {1}}, 3), AnnotationError);
  const KappaResult ragged = fleiss_kappa(Rows{{0, 0, 1, 2}, {1, 1, 1}, {2, 2, 0}}, 3);
  CHECK(ragged.subsampled);
  CHECK(ragged.raters == 3);
  CHECK(ragged.kappa == fleiss_kappa(Rows{{0, 0, 1}, {1, 1, 1}, {2, 2, 0}}, 3).kappa);
}

TEST_CASE("Fleiss kappa: random labels give kappa near zero") {
  Rng rng(31);
  Rows items(100000, std::vector<std::size_t>(3));
  for (auto& row : items)
    for (auto& l : row) l = rng.below(5);
  const double k = fleiss_kappa(items, 5).kappa;
  MESSAGE("null kappa " << k);
  CHECK(std::abs(k) < 0.02);
}

TEST_CASE("Fleiss kappa: invariant under relabelling the categories") {
  std::vector<std::size_t> perm = {0, 1, 2, 3, 4};
  const double ref = fleiss_kappa(expand(kWorked), 5).kappa;
  while (std::next_permutation(perm.begin(), perm.end())) {
    Rows relabelled = expand(kWorked);
    for (auto& row : relabelled)
      for (auto& l : row) l = perm[l];
    CHECK(fleiss_kappa(relabelled, 5).kappa == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("conduct distribution: counts, proportions and turn buckets") {
  auto corpus = load_corpus(fixture("corpus_three.json"));
  CHECK_THROWS_AS(conduct_distribution(std::vector<AnnotatedDialogue>{}), MetricError);
  std::vector<AnnotatedDialogue> unlabelled = {corpus[0]};
  CHECK_THROWS_AS(conduct_distribution(unlabelled), MetricError);

  aggregate(corpus);
  const ConductDistribution d = conduct_distribution(corpus, true);
  CHECK(d.total == 4);
  CHECK(d.auto_labeled == 1);
  CHECK(d.counts[n(Conduct::kNeutral)] == 3);
  CHECK(d.counts[n(Conduct::kAppreciative)] == 1);
  CHECK(d.proportions[n(Conduct::kNeutral)] == 0.75);
  CHECK(d.proportions[n(Conduct::kAppreciative)] == 0.25);
  for (std::size_t k = 0; k < kNumConducts; ++k)
    CHECK(d.proportions[k] == static_cast<double>(d.counts[k]) / static_cast<double>(d.total));
  REQUIRE(d.by_turn.size() == 4);
  std::size_t covered = 0;
  for (const auto& b : d.by_turn) {
    covered += b.total;
    if (b.total == 0) continue;
    const double s = std::accumulate(b.proportions.begin(), b.proportions.end(), 0.0);
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
  CHECK(covered == d.total);
  CHECK(d.by_turn[0].total == 4);  // every labelled system turn sits in positions 0-2
  CHECK(d.by_turn[0].name() == "0-2");
  CHECK(d.by_turn[3].name() == "9+");

  const ConductDistribution human = conduct_distribution(corpus, false, kDefaultTurnBuckets, false);
  CHECK(human.total == 3);
  CHECK(distribution_to_json(d).at("total") == 4);
  CHECK(distribution_table(d).find("appreciative") != std::string::npos);
}

TEST_CASE("simulated dialogues become a corpus with the configured conduct marginal") {
  TrainConfig tc;
  const Modules m = make_modules(tc, desk());
  const RulePolicy op(desk(), {.noise = 0.2, .conduct_marginal = kCorpusConductMarginal});
  std::vector<AnnotatedDialogue> corpus;
  for (const auto& r : collect(op, m, 41, 0, 400, tc.goals, ExecutionMode::kParallel))
    corpus.push_back(to_annotated(r.record, "sim" + std::to_string(corpus.size())));
  for (const auto& t : corpus[0].turns) {
    CHECK(t.annotations.size() == 3);
    CHECK(std::all_of(t.annotations.begin(), t.annotations.end(), [&](std::size_t l) { return l == t.annotations[0]; }));
  }
  const ConductDistribution d = conduct_distribution(corpus);
  for (std::size_t k = 0; k < kNumConducts; ++k) CHECK(std::abs(d.proportions[k] - kCorpusConductMarginal[k]) < 0.03);
}

TEST_CASE("behaviour cloning export replays the dialogue state") {
  auto corpus = load_corpus(fixture("corpus_three.json"));
  aggregate(corpus);
  const PolicyModel model = make_policy(TrainConfig{}, desk(), 1);
  const auto ex = behavior_cloning_examples(corpus, model, desk());
  // labelled system turns with acts: two in MUL0001, one in MUL0002, one auto-labelled
  REQUIRE(ex.size() == 4);
  const Vocabulary& v = model.vocab();
  CHECK(ex[1].tokens.back() == v.conduct_token(Conduct::kAppreciative));
  CHECK(ex[0].tokens == std::vector<std::size_t>{*v.find(Intent::kRequest, "hotel", "stars"), v.stop(),
                                                 v.conduct_token(Conduct::kNeutral)});
  for (const auto& e : ex) CHECK(e.features.size() == feature_dim(desk()));
  // perceived emotion of the second decision is the preceding user label
  const std::size_t off = emotion_offset(desk());
  CHECK(ex[1].features[off + index_of(UserEmotion::kSatisfied)] == 1.0);

  corpus[0].turns[1].acts = std::vector<SemanticAct>{SemanticAct::request("taxi", "leave")};
  try {
    behavior_cloning_examples(corpus, model, desk());
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("MUL0001") != std::string::npos);
  }
}
