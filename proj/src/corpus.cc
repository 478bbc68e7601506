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

#include "affectod/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "affectod/errors.h"
#include "affectod/state.h"
#include "affectod/vocab.h"

namespace affectod {
namespace {

std::string label_name(Speaker speaker, std::size_t label) {
  return std::string(speaker == Speaker::kSystem ? name_of(kAllConducts.at(label))
                                                 : name_of(kAllEmotions.at(label)));
}

std::size_t parse_label(Speaker speaker, const std::string& s) {
  if (speaker == Speaker::kSystem) {
    Conduct c;
    if (!try_parse_conduct(s, &c)) throw std::invalid_argument("unknown conduct label '" + s + "'");
    return index_of(c);
  }
  UserEmotion e;
  if (!try_parse_emotion(s, &e)) throw std::invalid_argument("unknown emotion label '" + s + "'");
  return index_of(e);
}

class Path {
 public:
  explicit Path(std::string id) : id_(std::move(id)) {}
  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw IngestionError("dialogue " + id_ + ": " + field + ": " + what);
  }

 private:
  std::string id_;
};

AnnotatedTurn turn_from_json(const Json& j, const std::string& at, const Path& path) {
  AnnotatedTurn t;
  if (!j.is_object()) path.fail(at, "expected an object");
  if (!j.contains("speaker") || !j["speaker"].is_string()) path.fail(at + ".speaker", "missing");
  const std::string speaker = j["speaker"];
  if (speaker == "user")
    t.speaker = Speaker::kUser;
  else if (speaker == "system")
    t.speaker = Speaker::kSystem;
  else
    path.fail(at + ".speaker", "expected user or system, got '" + speaker + "'");
  if (!j.contains("utterance") || !j["utterance"].is_string()) path.fail(at + ".utterance", "missing");
  t.utterance = j["utterance"];
  if (j.contains("acts")) {
    if (!j["acts"].is_array()) path.fail(at + ".acts", "expected an array");
    std::vector<SemanticAct> acts;
    for (std::size_t i = 0; i < j["acts"].size(); ++i) {
      try {
        acts.push_back(j["acts"][i].get<SemanticAct>());
      } catch (const std::exception& e) {
        path.fail(at + ".acts[" + std::to_string(i) + "]", e.what());
      }
    }
    t.acts = std::move(acts);
  }
  if (j.contains("annotations")) {
    if (!j["annotations"].is_array()) path.fail(at + ".annotations", "expected an array");
    for (std::size_t i = 0; i < j["annotations"].size(); ++i) {
      const Json& l = j["annotations"][i];
      const std::string field = at + ".annotations[" + std::to_string(i) + "]";
      if (!l.is_string()) path.fail(field, "expected a label string");
      try {
        t.annotations.push_back(parse_label(t.speaker, l.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        path.fail(field, e.what());
      }
    }
  }
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_string()) path.fail(at + ".label", "expected a label string");
    try {
      t.label = parse_label(t.speaker, j["label"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      path.fail(at + ".label", e.what());
    }
  }
  t.auto_labeled = j.value("auto_labeled", false);
  return t;
}

}  // namespace

std::vector<AnnotatedDialogue> corpus_from_json(const Json& j) {
  const Json* list = &j;
  if (j.is_object()) {
    if (!j.contains("dialogues")) throw IngestionError("corpus: missing 'dialogues'");
    list = &j["dialogues"];
  }
  if (!list->is_array()) throw IngestionError("corpus: 'dialogues' must be an array");
  std::vector<AnnotatedDialogue> out;
  out.reserve(list->size());
  for (std::size_t di = 0; di < list->size(); ++di) {
    const Json& d = (*list)[di];
    std::string id = "#" + std::to_string(di);
    if (d.is_object() && d.contains("dialogue_id") && d["dialogue_id"].is_string()) id = d["dialogue_id"];
    const Path path(id);
    if (!d.is_object()) path.fail("dialogue", "expected an object");
    if (!d.contains("dialogue_id") || !d["dialogue_id"].is_string()) path.fail("dialogue_id", "missing");
    AnnotatedDialogue dlg;
    dlg.id = id;
    dlg.source = d.value("source", std::string("multiwoz"));
    if (!d.contains("turns") || !d["turns"].is_array()) path.fail("turns", "missing or not an array");
    for (std::size_t ti = 0; ti < d["turns"].size(); ++ti)
      dlg.turns.push_back(turn_from_json(d["turns"][ti], "turns[" + std::to_string(ti) + "]", path));
    for (std::size_t ti = 0; ti < dlg.turns.size(); ++ti) {
      AnnotatedTurn& t = dlg.turns[ti];
      if (dlg.source == kDialMageSource && t.speaker == Speaker::kSystem) {
        t.label = index_of(Conduct::kNeutral);
        t.auto_labeled = true;
      } else if (t.label && !t.auto_labeled && t.annotations.size() < 3) {
        path.fail("turns[" + std::to_string(ti) + "].label",
                  "final label with fewer than 3 annotations");
      }
    }
    out.push_back(std::move(dlg));
  }
  return out;
}

std::vector<AnnotatedDialogue> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open corpus " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IngestionError("corpus " + path + " is not valid JSON: " + e.what());
  }
  return corpus_from_json(j);
}

Json corpus_to_json(std::span<const AnnotatedDialogue> corpus) {
  Json list = Json::array();
  for (const auto& d : corpus) {
    Json turns = Json::array();
    for (const auto& t : d.turns) {
      Json jt{{"speaker", t.speaker == Speaker::kSystem ? "system" : "user"},
              {"utterance", t.utterance}};
      if (t.acts) jt["acts"] = *t.acts;
      if (!t.annotations.empty()) {
        jt["annotations"] = Json::array();
        for (std::size_t l : t.annotations) jt["annotations"].push_back(label_name(t.speaker, l));
      }
      if (t.label) jt["label"] = label_name(t.speaker, *t.label);
      if (t.auto_labeled) jt["auto_labeled"] = true;
      turns.push_back(std::move(jt));
    }
    list.push_back(Json{{"dialogue_id", d.id}, {"source", d.source}, {"turns", std::move(turns)}});
  }
  return Json{{"dialogues", std::move(list)}};
}

void save_corpus(const std::string& path, std::span<const AnnotatedDialogue> corpus) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write corpus " + path);
  out << corpus_to_json(corpus).dump(1) << "\n";
}

Vote majority_vote(std::span<const std::size_t> labels) {
  if (labels.size() < 3)
    throw AnnotationError("majority vote needs at least 3 labels, got " +
                          std::to_string(labels.size()));
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t l : labels) ++counts[l];
  std::size_t best = 0, best_count = 0, ties = 0;
  for (const auto& [label, c] : counts) {
    if (c > best_count) {
      best = label;
      best_count = c;
      ties = 1;
    } else if (c == best_count) {
      ++ties;
    }
  }
  if (labels.size() == 3) {
    if (2 * best_count > labels.size()) return {Vote::Kind::kLabel, best};
    return {Vote::Kind::kEscalate, 0};
  }
  if (ties == 1) return {Vote::Kind::kLabel, best};
  return {Vote::Kind::kManual, 0};
}

AggregationReport aggregate(std::vector<AnnotatedDialogue>& corpus) {
  AggregationReport r;
  for (auto& d : corpus) {
    for (auto& t : d.turns) {
      if (t.auto_labeled) {
        ++r.auto_labeled;
        continue;
      }
      if (t.label || t.annotations.empty()) continue;
      if (t.annotations.size() < 3) {
        ++r.escalated;
        continue;
      }
      const Vote v = majority_vote(t.annotations);
      switch (v.kind) {
        case Vote::Kind::kLabel:
          t.label = v.label;
          ++r.finalized;
          break;
        case Vote::Kind::kEscalate:
          ++r.escalated;
          break;
        case Vote::Kind::kManual:
          ++r.manual;
          break;
      }
    }
  }
  return r;
}

KappaResult fleiss_kappa_counts(std::span<const std::vector<std::size_t>> counts) {
  if (counts.empty()) throw AnnotationError("fleiss kappa: no items");
  const std::size_t k = counts.front().size();
  std::size_t n = 0;
  for (std::size_t c : counts.front()) n += c;
  if (n < 2) throw AnnotationError("fleiss kappa: need at least 2 ratings per item");
  KappaResult r;
  r.items = counts.size();
  r.raters = n;
  std::vector<double> column(k, 0.0);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].size() != k) throw AnnotationError("fleiss kappa: ragged category count");
    std::size_t row = 0;
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += counts[i][j];
      sq += static_cast<double>(counts[i][j]) * static_cast<double>(counts[i][j]);
      column[j] += static_cast<double>(counts[i][j]);
    }
    if (row != n)
      throw AnnotationError("fleiss kappa: item " + std::to_string(i) + " has " + std::to_string(row) +
                            " ratings, expected " + std::to_string(n));
    const double nd = static_cast<double>(n);
    p_bar += (sq - nd) / (nd * (nd - 1.0));
  }
  const double total = static_cast<double>(counts.size() * n);
  p_bar /= static_cast<double>(counts.size());
  double p_e = 0.0;
  for (double c : column) p_e += (c / total) * (c / total);
  if (std::fabs(1.0 - p_e) < 1e-12) {
    r.degenerate = true;
    r.kappa = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.kappa = (p_bar - p_e) / (1.0 - p_e);
  return r;
}

KappaResult fleiss_kappa(std::span<const std::vector<std::size_t>> ratings, std::size_t categories) {
  if (ratings.empty()) throw AnnotationError("fleiss kappa: no items");
  std::size_t m = ratings.front().size();
  bool ragged = false;
  for (const auto& r : ratings) {
    if (r.size() != m) ragged = true;
    m = std::min(m, r.size());
  }
  if (m < 2) throw AnnotationError("fleiss kappa: need at least 2 ratings per item");
  std::vector<std::vector<std::size_t>> counts(ratings.size(), std::vector<std::size_t>(categories, 0));
  for (std::size_t i = 0; i < ratings.size(); ++i)
    for (std::size_t a = 0; a < m; ++a) {
      if (ratings[i][a] >= categories)
        throw AnnotationError("fleiss kappa: label " + std::to_string(ratings[i][a]) +
                              " outside " + std::to_string(categories) + " categories");
      ++counts[i][ratings[i][a]];
    }
  KappaResult r = fleiss_kappa_counts(counts);
  r.subsampled = ragged;
  return r;
}

std::string TurnBucket::name() const {
  if (last < 0) return std::to_string(first) + "+";
  return std::to_string(first) + "-" + std::to_string(last);
}

ConductDistribution conduct_distribution(std::span<const AnnotatedDialogue> corpus, bool by_turn,
                                         const std::vector<int>& buckets,
                                         bool include_auto_labeled) {
  if (by_turn && (buckets.empty() || buckets.front() != 0 ||
                  !std::is_sorted(buckets.begin(), buckets.end()) ||
                  std::adjacent_find(buckets.begin(), buckets.end()) != buckets.end()))
    throw ConfigError("turn buckets must be ascending lower bounds starting at 0");
  const std::size_t nb = by_turn ? buckets.size() : 0;
  // per-dialogue integer counts, reduced serially in dialogue order
  std::vector<std::vector<std::size_t>> per(corpus.size(),
                                            std::vector<std::size_t>((nb + 1) * kNumConducts + 1, 0));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t di = 0; di < static_cast<std::ptrdiff_t>(corpus.size()); ++di) {
    auto& c = per[static_cast<std::size_t>(di)];
    int position = 0;
    for (const auto& t : corpus[static_cast<std::size_t>(di)].turns) {
      if (t.speaker != Speaker::kSystem) continue;
      const int pos = position++;
      if (!t.label || (t.auto_labeled && !include_auto_labeled)) continue;
      ++c[*t.label];
      if (t.auto_labeled) ++c.back();
      if (by_turn) {
        std::size_t b = 0;
        while (b + 1 < nb && pos >= buckets[b + 1]) ++b;
        ++c[(b + 1) * kNumConducts + *t.label];
      }
    }
  }
  ConductDistribution d;
  for (std::size_t b = 0; b < nb; ++b) {
    TurnBucket tb;
    tb.first = buckets[b];
    tb.last = b + 1 < nb ? buckets[b + 1] - 1 : -1;
    d.by_turn.push_back(tb);
  }
  for (const auto& c : per) {
    for (std::size_t k = 0; k < kNumConducts; ++k) {
      d.counts[k] += c[k];
      for (std::size_t b = 0; b < nb; ++b) d.by_turn[b].counts[k] += c[(b + 1) * kNumConducts + k];
    }
    d.auto_labeled += c.back();
  }
  for (std::size_t k = 0; k < kNumConducts; ++k) d.total += d.counts[k];
  if (d.total == 0) throw MetricError("conduct distribution: no finalized system labels");
  for (std::size_t k = 0; k < kNumConducts; ++k)
    d.proportions[k] = static_cast<double>(d.counts[k]) / static_cast<double>(d.total);
  for (auto& tb : d.by_turn) {
    for (std::size_t k = 0; k < kNumConducts; ++k) tb.total += tb.counts[k];
    if (tb.total == 0) continue;
    for (std::size_t k = 0; k < kNumConducts; ++k)
      tb.proportions[k] = static_cast<double>(tb.counts[k]) / static_cast<double>(tb.total);
  }
  return d;
}

Json distribution_to_json(const ConductDistribution& d) {
  auto histogram = [](const auto& counts, const auto& props) {
    Json h = Json::object();
    for (Conduct c : kAllConducts)
      h[std::string(name_of(c))] = {{"count", counts[index_of(c)]}, {"proportion", props[index_of(c)]}};
    return h;
  };
  Json j{{"total", d.total},
         {"auto_labeled", d.auto_labeled},
         {"overall", histogram(d.counts, d.proportions)}};
  if (!d.by_turn.empty()) {
    j["by_turn"] = Json::array();
    for (const auto& b : d.by_turn)
      j["by_turn"].push_back({{"turns", b.name()},
                              {"total", b.total},
                              {"histogram", histogram(b.counts, b.proportions)}});
  }
  return j;
}

std::string distribution_table(const ConductDistribution& d) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << std::left << std::setw(14) << "Conduct" << std::right << std::setw(10) << "Count"
      << std::setw(8) << "Share";
  for (const auto& b : d.by_turn) out << std::setw(9) << b.name();
  out << "\n";
  for (Conduct c : kAllConducts) {
    const std::size_t k = index_of(c);
    out << std::left << std::setw(14) << name_of(c) << std::right << std::setw(10) << d.counts[k]
        << std::setw(8) << d.proportions[k];
    for (const auto& b : d.by_turn) out << std::setw(9) << b.proportions[k];
    out << "\n";
  }
  out << std::left << std::setw(14) << "total" << std::right << std::setw(10) << d.total;
  if (d.auto_labeled) out << "  (" << d.auto_labeled << " auto-labelled neutral)";
  out << "\n";
  return out.str();
}

AnnotatedDialogue to_annotated(const EpisodeRecord& episode, std::string id) {
  AnnotatedDialogue d;
  d.id = std::move(id);
  d.source = "simulated";
  for (const Turn& t : episode.turns) {
    AnnotatedTurn u;
    u.speaker = Speaker::kUser;
    u.utterance = t.user_utterance;
    u.acts = t.user_acts;
    u.annotations.assign(3, index_of(t.true_emotion));
    u.label = index_of(t.true_emotion);
    d.turns.push_back(std::move(u));
    if (!t.has_system_response()) continue;
    AnnotatedTurn s;
    s.speaker = Speaker::kSystem;
    s.utterance = t.system_utterance;
    s.acts = t.system_acts;
    s.annotations.assign(3, index_of(t.conduct));
    s.label = index_of(t.conduct);
    d.turns.push_back(std::move(s));
  }
  return d;
}

std::vector<BcExample> behavior_cloning_examples(std::span<const AnnotatedDialogue> corpus,
                                                 const PolicyModel& model,
                                                 const Ontology& ontology) {
  std::vector<BcExample> out;
  const bool with_emotion = model.config().emotion_in_state;
  for (const auto& d : corpus) {
    DialogueState state = DialogueState::initial(ontology);
    for (std::size_t ti = 0; ti < d.turns.size(); ++ti) {
      const AnnotatedTurn& t = d.turns[ti];
      const std::string at = "dialogue " + d.id + ": turns[" + std::to_string(ti) + "]: ";
      if (t.speaker == Speaker::kUser) {
        if (t.acts) {
          try {
            state = track(state, *t.acts, ontology);
          } catch (const TrackingError& e) {
            throw IngestionError(at + e.what());
          }
        }
        if (t.label) state.perceived_emotion = kAllEmotions[*t.label];
        continue;
      }
      if (!t.acts || t.acts->empty() || !t.label) continue;
      BcExample ex;
      ex.features = featurize(state, ontology, with_emotion);
      try {
        ex.tokens = encode_decision(model, *t.acts, kAllConducts[*t.label]);
      } catch (const IngestionError& e) {
        throw IngestionError(at + e.what());
      }
      out.push_back(std::move(ex));
      apply_system_acts(state, *t.acts, ontology);
    }
  }
  return out;
}

}  // namespace affectod
