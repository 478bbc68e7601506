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

#ifndef AFFECTOD_METRICS_H_
#define AFFECTOD_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "affectod/episode.h"
#include "affectod/labels.h"
#include "affectod/ontology.h"

namespace affectod {

// +1 for satisfied/excited, -1 for dissatisfied/abusive/fearful, 0 for
// neutral/apologetic.
int sentiment_of(UserEmotion e);

enum class EmotionSource { kPerceived, kTrue };

// Mean over every user turn. Throws MetricError when there are no turns.
double mean_sentiment(std::span<const EpisodeRecord> episodes,
                      EmotionSource source = EmotionSource::kPerceived);

// Mean user sentiment of one episode (0 for an episode without turns).
double episode_sentiment(const EpisodeRecord& episode,
                         EmotionSource source = EmotionSource::kPerceived);

struct TurnSentiment {
  int turn = 0;
  double mean = 0.0;
  std::size_t count = 0;
  friend bool operator==(const TurnSentiment&, const TurnSentiment&) = default;
};

// Grouped by turn index; empty buckets are omitted.
std::vector<TurnSentiment> sentiment_by_turn(std::span<const EpisodeRecord> episodes,
                                             EmotionSource source = EmotionSource::kPerceived);

// Turn i of an L-turn dialogue belongs to third floor(3i/L).
struct SentimentProgression {
  double first_third = 0.0;
  double final_third = 0.0;
  std::size_t first_count = 0;
  std::size_t final_count = 0;
  double gain() const { return final_third - first_third; }
};
SentimentProgression sentiment_progression(std::span<const EpisodeRecord> episodes,
                                           EmotionSource source = EmotionSource::kPerceived);

struct HallucinationSpan {
  std::size_t episode = 0;
  int turn = 0;
  std::string value;
  std::size_t offset = 0;
};

struct HallucinationReport {
  double rate = 0.0;  // hallucinating system turns / system turns
  std::size_t system_turns = 0;
  std::size_t hallucinating = 0;
  std::vector<HallucinationSpan> spans;
};

// True when a known ontology value appears in the utterance without an
// inform/recommend/confirm act carrying that value for one of its slots.
bool turn_hallucinates(std::string_view utterance, std::span<const SemanticAct> acts,
                       const Ontology& ontology);
HallucinationReport hallucination_rate(std::span<const EpisodeRecord> episodes,
                                       const Ontology& ontology);

// Unweighted mean of per-label F1 over `labels`. A label with no gold and no
// predicted occurrence is excluded when `exclude_absent`, otherwise it counts
// as 0. Throws MetricError on a length mismatch or when nothing is left to
// average.
double macro_f1(std::span<const std::string> predicted, std::span<const std::string> gold,
                std::span<const std::string> labels, bool exclude_absent = true);

struct SignificanceResult {
  std::string method = "paired bootstrap";
  double delta = 0.0;  // mean(a) - mean(b)
  double p_value = 1.0;
  bool significant = false;
  int resamples = 0;
};

// Two-sided paired bootstrap on the differences a_i - b_i: resample the
// centred differences and count |mean*| >= |delta|; p = (count + 1) / (B + 1).
// Throws MetricError with fewer than `min_samples` pairs or unequal lengths.
SignificanceResult paired_bootstrap(std::span<const double> a, std::span<const double> b,
                                    double alpha = 0.05, int resamples = 10000,
                                    std::uint64_t seed = 2024, std::size_t min_samples = 30);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct MetricReport {
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double inform_rate = 0.0;
  double mean_sentiment = 0.0;       // perceived
  double mean_true_sentiment = 0.0;  // simulator side
  double mean_return = 0.0;
  double hallucination_rate = 0.0;
  Interval success_ci, inform_ci, sentiment_ci, return_ci;
  std::vector<TurnSentiment> sentiment_by_turn;
  SentimentProgression progression;
  std::string config_hash;
};

// Percentile bootstrap CIs (95%, 1000 resamples, fixed seed). Aborted
// episodes are excluded.
MetricReport build_report(std::span<const EpisodeRecord> episodes, const Ontology& ontology);
Json report_to_json(const MetricReport& r);
std::string report_table(const MetricReport& r, const std::string& label = "system");

}  // namespace affectod

#endif  // AFFECTOD_METRICS_H_
