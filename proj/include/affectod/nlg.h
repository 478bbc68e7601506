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

#ifndef AFFECTOD_NLG_H_
#define AFFECTOD_NLG_H_

#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affectod/act.h"
#include "affectod/labels.h"
#include "affectod/ontology.h"
#include "affectod/rng.h"

namespace affectod {

// Surface templates keyed by "intent|domain|slot" where domain and slot may
// be "*" (any) and slot may be empty (act without slot). Placeholders:
// {value}, {domain}, {slot}. Conduct phrases are prepended to the response;
// neutral has none.
class TemplateBank {
 public:
  std::map<std::string, std::vector<std::string>> templates;
  std::array<std::vector<std::string>, kNumConducts> phrases;

  static TemplateBank defaults();

  // Most specific template list for an act, or nullptr.
  const std::vector<std::string>* lookup(const SemanticAct& act) const;
  bool covers(const SemanticAct& act) const { return lookup(act) != nullptr; }
  const std::vector<std::string>& phrases_of(Conduct c) const { return phrases[index_of(c)]; }
};

Json template_bank_to_json(const TemplateBank& bank);
TemplateBank template_bank_from_json(const Json& j);

// Conduct/act compatibility: appreciative and enthusiastic are blocked on
// responses containing nooffer; apologetic and compassionate are blocked on
// responses made only of booking confirmations.
bool conduct_eligible(Conduct conduct, std::span<const SemanticAct> acts);

// Realises acts in order, prefixed with one affective phrase when the
// conduct is not neutral and is eligible. Every informed, recommended or
// confirmed value appears verbatim. Throws RealizationError naming the first
// act without a template.
std::string realize(std::span<const SemanticAct> acts, Conduct conduct, const TemplateBank& bank,
                    Rng& rng);

// Conduct whose affective phrase occurs in a system utterance (neutral when
// none does).
Conduct detect_conduct(std::string_view utterance, const TemplateBank& bank);

// A known ontology value found in text.
struct ValueSpan {
  std::string value;
  std::size_t offset = 0;
  friend bool operator==(const ValueSpan&, const ValueSpan&) = default;
};

// Known ontology values in `text` that no licensing act accounts for. Act
// values are masked first, then known values are matched longest first with
// word boundaries, case-insensitively. With `informative_only`, only
// inform/recommend/confirm acts license values; otherwise any act carrying
// the value does.
std::vector<ValueSpan> unlicensed_values(std::string_view text, std::span<const SemanticAct> acts,
                                         const Ontology& ontology, bool informative_only);

struct SlotErrors {
  std::vector<std::string> missing;  // act values absent from the utterance
  std::vector<ValueSpan> unlicensed;
  bool erroneous() const { return !missing.empty() || !unlicensed.empty(); }
};

struct SerReport {
  double rate = 0.0;  // erroneous utterances / utterances
  std::vector<SlotErrors> per_utterance;
};

using RealisedTurn = std::pair<std::string, std::vector<SemanticAct>>;

// Per-utterance slot error rate; an empty input has rate 0.
SerReport slot_error_rate(std::span<const RealisedTurn> turns, const Ontology& ontology);

Json ser_report_to_json(const SerReport& report);
std::string ser_report_table(const SerReport& report);

}  // namespace affectod

#endif  // AFFECTOD_NLG_H_
