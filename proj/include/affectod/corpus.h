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

#ifndef AFFECTOD_CORPUS_H_
#define AFFECTOD_CORPUS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affectod/act.h"
#include "affectod/episode.h"
#include "affectod/labels.h"
#include "affectod/ontology.h"
#include "affectod/ppo.h"

namespace affectod {

enum class Speaker { kUser, kSystem };

// One corpus turn. Labels are indices into the conduct set for system turns
// and into the emotion set for user turns.
struct AnnotatedTurn {
  Speaker speaker = Speaker::kUser;
  std::string utterance;
  std::optional<std::vector<SemanticAct>> acts;
  std::vector<std::size_t> annotations;
  std::optional<std::size_t> label;  // final label, set by aggregation
  bool auto_labeled = false;         // machine-generated system turn, Neutral by rule

  std::size_t num_categories() const {
    return speaker == Speaker::kSystem ? kNumConducts : kNumEmotions;
  }
  friend bool operator==(const AnnotatedTurn&, const AnnotatedTurn&) = default;
};

struct AnnotatedDialogue {
  std::string id;
  std::string source = "multiwoz";  // "dialmage" marks machine-generated system turns
  std::vector<AnnotatedTurn> turns;
  friend bool operator==(const AnnotatedDialogue&, const AnnotatedDialogue&) = default;
};

inline constexpr const char* kDialMageSource = "dialmage";

// Corpus file: {"dialogues": [...]} or a bare array. Per dialogue:
//   {"dialogue_id", "source"?, "turns": [{"speaker": "user"|"system",
//    "utterance", "acts"?, "annotations"?: [label...], "label"?}]}
// System turns of "dialmage" dialogues are labelled Neutral and flagged.
// Throws IngestionError naming the dialogue id and field path.
std::vector<AnnotatedDialogue> corpus_from_json(const Json& j);
std::vector<AnnotatedDialogue> load_corpus(const std::string& path);
Json corpus_to_json(std::span<const AnnotatedDialogue> corpus);
void save_corpus(const std::string& path, std::span<const AnnotatedDialogue> corpus);

struct Vote {
  enum class Kind { kLabel, kEscalate, kManual };
  Kind kind = Kind::kLabel;
  std::size_t label = 0;  // valid for kLabel
  friend bool operator==(const Vote&, const Vote&) = default;
};

// Three labels: strict majority or escalate to a fourth annotator. Four or
// more: unique plurality or manual resolution. Throws AnnotationError below
// three labels.
Vote majority_vote(std::span<const std::size_t> labels);

struct AggregationReport {
  std::size_t finalized = 0;
  std::size_t escalated = 0;  // need another annotator
  std::size_t manual = 0;
  std::size_t auto_labeled = 0;
};

// Fills missing final labels by majority vote. Turns that already carry a
// label or have no annotations are left alone.
AggregationReport aggregate(std::vector<AnnotatedDialogue>& corpus);

struct KappaResult {
  double kappa = 0.0;
  bool degenerate = false;  // one category observed, expected agreement 1
  std::size_t items = 0;
  std::size_t raters = 0;
  bool subsampled = false;  // ragged input truncated to the minimum count
};

// Fleiss' kappa over per-item label lists. Ragged items keep their first
// m labels, m being the smallest count. Throws AnnotationError with fewer
// than two raters or no items.
KappaResult fleiss_kappa(std::span<const std::vector<std::size_t>> ratings,
                         std::size_t categories);
// Same over an items x categories count matrix with equal row sums.
KappaResult fleiss_kappa_counts(std::span<const std::vector<std::size_t>> counts);

struct TurnBucket {
  int first = 0;
  int last = -1;  // -1: open ended
  std::array<std::size_t, kNumConducts> counts{};
  std::array<double, kNumConducts> proportions{};
  std::size_t total = 0;
  std::string name() const;
};

struct ConductDistribution {
  std::array<std::size_t, kNumConducts> counts{};
  std::array<double, kNumConducts> proportions{};
  std::size_t total = 0;
  std::size_t auto_labeled = 0;
  std::vector<TurnBucket> by_turn;  // filled in by-turn mode
};

inline const std::vector<int> kDefaultTurnBuckets = {0, 3, 6, 9};

// Final system conduct labels, overall and optionally by system-turn
// position (bucket lower bounds, ascending from 0). Throws MetricError when
// no system turn carries a final label.
ConductDistribution conduct_distribution(std::span<const AnnotatedDialogue> corpus,
                                         bool by_turn = false,
                                         const std::vector<int>& buckets = kDefaultTurnBuckets,
                                         bool include_auto_labeled = true);

Json distribution_to_json(const ConductDistribution& d);
std::string distribution_table(const ConductDistribution& d);

// Simulated dialogues as a corpus: three identical annotations per turn, the
// simulator's true emotion for user turns and the decoded conduct for system
// turns.
AnnotatedDialogue to_annotated(const EpisodeRecord& episode, std::string id);

// Replays each dialogue through the tracker and turns every labelled system
// turn with acts into a (features, tokens) example. The perceived emotion is
// the final label of the preceding user turn. Throws IngestionError naming
// the dialogue on untrackable or out-of-vocabulary turns.
std::vector<BcExample> behavior_cloning_examples(std::span<const AnnotatedDialogue> corpus,
                                                 const PolicyModel& model,
                                                 const Ontology& ontology);

}  // namespace affectod

#endif  // AFFECTOD_CORPUS_H_
