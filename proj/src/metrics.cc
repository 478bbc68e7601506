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

#include "affectod/metrics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "affectod/errors.h"
#include "affectod/nlg.h"
#include "affectod/rng.h"

namespace affectod {
namespace {

UserEmotion pick(const Turn& t, EmotionSource s) {
  return s == EmotionSource::kPerceived ? t.perceived_emotion : t.true_emotion;
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

Interval bootstrap_ci(std::span<const double> xs, std::uint64_t seed) {
  if (xs.empty()) return {};
  constexpr int kB = 1000;
  Rng rng(seed);
  std::vector<double> means(kB);
  for (int b = 0; b < kB; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += xs[rng.below(xs.size())];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(xs.size());
  }
  std::sort(means.begin(), means.end());
  return {means[25], means[974]};
}

}  // namespace

int sentiment_of(UserEmotion e) {
  switch (e) {
    case UserEmotion::kSatisfied:
    case UserEmotion::kExcited: return 1;
    case UserEmotion::kDissatisfied:
    case UserEmotion::kAbusive:
    case UserEmotion::kFearful: return -1;
    case UserEmotion::kNeutral:
    case UserEmotion::kApologetic: return 0;
  }
  return 0;
}

double mean_sentiment(std::span<const EpisodeRecord> episodes, EmotionSource source) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : episodes)
    for (const auto& t : e.turns) {
      sum += sentiment_of(pick(t, source));
      ++n;
    }
  if (n == 0) throw MetricError("mean sentiment is undefined without user turns");
  return sum / static_cast<double>(n);
}

double episode_sentiment(const EpisodeRecord& episode, EmotionSource source) {
  if (episode.turns.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : episode.turns) sum += sentiment_of(pick(t, source));
  return sum / static_cast<double>(episode.turns.size());
}

std::vector<TurnSentiment> sentiment_by_turn(std::span<const EpisodeRecord> episodes,
                                             EmotionSource source) {
  std::map<int, std::pair<double, std::size_t>> acc;
  for (const auto& e : episodes)
    for (std::size_t i = 0; i < e.turns.size(); ++i) {
      auto& [s, n] = acc[static_cast<int>(i)];
      s += sentiment_of(pick(e.turns[i], source));
      ++n;
    }
  std::vector<TurnSentiment> out;
  for (const auto& [turn, sn] : acc)
    out.push_back({turn, sn.first / static_cast<double>(sn.second), sn.second});
  return out;
}

SentimentProgression sentiment_progression(std::span<const EpisodeRecord> episodes,
                                           EmotionSource source) {
  SentimentProgression p;
  double first = 0.0, last = 0.0;
  for (const auto& e : episodes) {
    const std::size_t L = e.turns.size();
    for (std::size_t i = 0; i < L; ++i) {
      const std::size_t third = 3 * i / L;
      const int s = sentiment_of(pick(e.turns[i], source));
      if (third == 0) {
        first += s;
        ++p.first_count;
      } else if (third == 2) {
        last += s;
        ++p.final_count;
      }
    }
  }
  if (p.first_count) p.first_third = first / static_cast<double>(p.first_count);
  if (p.final_count) p.final_third = last / static_cast<double>(p.final_count);
  return p;
}

bool turn_hallucinates(std::string_view utterance, std::span<const SemanticAct> acts,
                       const Ontology& ontology) {
  return !unlicensed_values(utterance, acts, ontology, /*informative_only=*/true).empty();
}

HallucinationReport hallucination_rate(std::span<const EpisodeRecord> episodes,
                                       const Ontology& ontology) {
  HallucinationReport r;
  for (std::size_t ei = 0; ei < episodes.size(); ++ei) {
    for (const auto& t : episodes[ei].turns) {
      if (!t.has_system_response()) continue;
      ++r.system_turns;
      auto spans = unlicensed_values(t.system_utterance, t.system_acts, ontology, true);
      if (spans.empty()) continue;
      ++r.hallucinating;
      for (auto& s : spans) r.spans.push_back({ei, t.index, std::move(s.value), s.offset});
    }
  }
  r.rate = r.system_turns ? static_cast<double>(r.hallucinating) / static_cast<double>(r.system_turns)
                          : 0.0;
  return r;
}

double macro_f1(std::span<const std::string> predicted, std::span<const std::string> gold,
                std::span<const std::string> labels, bool exclude_absent) {
  if (predicted.size() != gold.size())
    throw MetricError("macro_f1: " + std::to_string(predicted.size()) + " predictions for " +
                      std::to_string(gold.size()) + " gold labels");
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& label : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predicted[i] == label, g = gold[i] == label;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    if (tp + fp + fn == 0) {
      if (exclude_absent) continue;
      ++counted;
      continue;
    }
    sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    ++counted;
  }
  if (counted == 0) throw MetricError("macro_f1: no label to average");
  return sum / static_cast<double>(counted);
}

SignificanceResult paired_bootstrap(std::span<const double> a, std::span<const double> b,
                                    double alpha, int resamples, std::uint64_t seed,
                                    std::size_t min_samples) {
  if (a.size() != b.size()) throw MetricError("paired bootstrap needs equal-length samples");
  if (a.size() < min_samples)
    throw MetricError("paired bootstrap needs at least " + std::to_string(min_samples) + " pairs");
  if (resamples < 1) throw MetricError("paired bootstrap needs at least one resample");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double delta = mean_of(d);
  for (double& x : d) x -= delta;
  Rng rng(seed);
  long extreme = 0;
  const double tol = 1e-12 * std::max(1.0, std::abs(delta));
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d[rng.below(n)];
    if (std::abs(s / static_cast<double>(n)) >= std::abs(delta) - tol) ++extreme;
  }
  SignificanceResult out;
  out.delta = delta;
  out.resamples = resamples;
  out.p_value = static_cast<double>(extreme + 1) / static_cast<double>(resamples + 1);
  out.significant = out.p_value < alpha;
  return out;
}

MetricReport build_report(std::span<const EpisodeRecord> all, const Ontology& ontology) {
  std::vector<EpisodeRecord> eps;
  for (const auto& e : all)
    if (!e.aborted) eps.push_back(e);
  MetricReport r;
  r.episodes = eps.size();
  if (eps.empty()) throw MetricError("no complete episodes to report on");
  std::vector<double> succ, inf, sent, ret;
  for (const auto& e : eps) {
    succ.push_back(e.outcome.success ? 1.0 : 0.0);
    inf.push_back(e.outcome.inform ? 1.0 : 0.0);
    sent.push_back(episode_sentiment(e));
    ret.push_back(e.outcome.total_return);
  }
  r.success_rate = mean_of(succ);
  r.inform_rate = mean_of(inf);
  r.mean_sentiment = mean_sentiment(eps);
  r.mean_true_sentiment = mean_sentiment(eps, EmotionSource::kTrue);
  r.mean_return = mean_of(ret);
  r.hallucination_rate = hallucination_rate(eps, ontology).rate;
  r.success_ci = bootstrap_ci(succ, 11);
  r.inform_ci = bootstrap_ci(inf, 12);
  r.sentiment_ci = bootstrap_ci(sent, 13);
  r.return_ci = bootstrap_ci(ret, 14);
  r.sentiment_by_turn = sentiment_by_turn(eps);
  r.progression = sentiment_progression(eps);
  r.config_hash = eps.front().config_hash;
  return r;
}

Json report_to_json(const MetricReport& r) {
  auto ci = [](const Interval& i) { return Json::array({i.lo, i.hi}); };
  Json j;
  j["episodes"] = r.episodes;
  j["success_rate"] = r.success_rate;
  j["inform_rate"] = r.inform_rate;
  j["mean_sentiment"] = r.mean_sentiment;
  j["mean_true_sentiment"] = r.mean_true_sentiment;
  j["mean_return"] = r.mean_return;
  j["hallucination_rate"] = r.hallucination_rate;
  j["confidence_intervals"] = {{"method", "percentile bootstrap, 95%"},
                               {"success_rate", ci(r.success_ci)},
                               {"inform_rate", ci(r.inform_ci)},
                               {"mean_sentiment", ci(r.sentiment_ci)},
                               {"mean_return", ci(r.return_ci)}};
  j["sentiment_by_turn"] = Json::array();
  for (const auto& t : r.sentiment_by_turn)
    j["sentiment_by_turn"].push_back({{"turn", t.turn}, {"mean", t.mean}, {"count", t.count}});
  j["sentiment_progression"] = {{"first_third", r.progression.first_third},
                                {"final_third", r.progression.final_third},
                                {"first_count", r.progression.first_count},
                                {"final_count", r.progression.final_count}};
  j["config_hash"] = r.config_hash;
  return j;
}

std::string report_table(const MetricReport& r, const std::string& label) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << std::left << std::setw(14) << "System" << std::right << std::setw(9) << "Success"
      << std::setw(9) << "Inform" << std::setw(11) << "Sentiment" << std::setw(10) << "Return"
      << std::setw(9) << "Halluc." << std::setw(8) << "N" << "\n";
  out << std::left << std::setw(14) << label << std::right << std::setw(9) << r.success_rate
      << std::setw(9) << r.inform_rate << std::setw(11) << r.mean_sentiment << std::setw(10)
      << std::setprecision(2) << r.mean_return << std::setprecision(3) << std::setw(9)
      << r.hallucination_rate << std::setw(8) << r.episodes << "\n";
  out << "\nSentiment by turn\n";
  for (const auto& t : r.sentiment_by_turn)
    out << "  turn " << std::setw(2) << t.turn << "  " << std::setw(7) << t.mean << "  (n=" << t.count
        << ")\n";
  return out.str();
}

}  // namespace affectod
