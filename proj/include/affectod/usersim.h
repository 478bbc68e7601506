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

#ifndef AFFECTOD_USERSIM_H_
#define AFFECTOD_USERSIM_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "affectod/act.h"
#include "affectod/erc.h"
#include "affectod/goal.h"
#include "affectod/labels.h"
#include "affectod/ontology.h"
#include "affectod/rng.h"

namespace affectod {

enum class AppraisalEvent {
  kProgress = 0,
  kViolation,
  kRepeatOffense,
  kNoOfferValid,
  kNoOfferInvalid,
  kBookingSuccess,
  kOffTopic,
};
inline constexpr std::size_t kNumEvents = 7;
inline constexpr std::array<AppraisalEvent, kNumEvents> kAllEvents = {
    AppraisalEvent::kProgress,       AppraisalEvent::kViolation,    AppraisalEvent::kRepeatOffense,
    AppraisalEvent::kNoOfferValid,   AppraisalEvent::kNoOfferInvalid,
    AppraisalEvent::kBookingSuccess, AppraisalEvent::kOffTopic};
inline std::size_t index_of(AppraisalEvent e) { return static_cast<std::size_t>(e); }
std::string_view name_of(AppraisalEvent e);
AppraisalEvent parse_event(std::string_view s);

// Events that count as a system failure (raise the failure counter).
bool is_failure(AppraisalEvent e);

// Ordering used by monotonicity checks: abusive < dissatisfied = fearful <
// neutral = apologetic < satisfied = excited.
int valence_rank(UserEmotion e);

struct Persona {
  std::map<std::string, UserEmotion> dispositions;  // domain -> disposition
  int patience = 3;
  double expressiveness = 1.0;
  void validate() const;  // throws ConfigError
  friend bool operator==(const Persona&, const Persona&) = default;
};

struct PersonaDistribution {
  std::map<std::string, std::map<UserEmotion, double>> dispositions;
  std::map<int, double> patience;
  std::map<double, double> expressiveness;
  static PersonaDistribution defaults();
  void validate() const;  // every categorical sums to 1 +- 1e-9; throws ConfigError
};

Persona sample_persona(const PersonaDistribution& dist, Rng& rng);

void to_json(Json& j, const Persona& p);
void from_json(const Json& j, Persona& p);
Json persona_distribution_to_json(const PersonaDistribution& d);
PersonaDistribution persona_distribution_from_json(const Json& j);

using EmotionDist = std::array<double, kNumEmotions>;

// Next-emotion distribution per (current emotion, event) plus the conduct
// modifier strength and the per-turn impatience ramp on violations.
struct RuleTable {
  std::array<std::array<EmotionDist, kNumEvents>, kNumEmotions> cells{};
  double modifier_probability = 0.5;
  double impatience_per_turn = 0.05;

  static RuleTable defaults();
  const EmotionDist& cell(UserEmotion e, AppraisalEvent ev) const {
    return cells[index_of(e)][index_of(ev)];
  }
  void validate() const;  // throws ConfigError
};

Json rule_table_to_json(const RuleTable& t);
RuleTable rule_table_from_json(const Json& j);

struct AppraisalContext {
  UserEmotion emotion = UserEmotion::kNeutral;
  AppraisalEvent event = AppraisalEvent::kOffTopic;
  Conduct conduct = Conduct::kNeutral;  // effective conduct
  int turn = 0;
  bool goal_complete = false;
  bool escalate = false;
};

// Exact next-emotion distribution.
//  escalate                  -> abusive
//  goal completed            -> satisfied (excited users stay excited)
//  repair: negative user, progress, apologetic (compassionate for fearful
//          users)            -> neutral
//  otherwise the table cell (violations ramped by turn), then softening of
//  negative outcomes on failure/no-offer events under apologetic or
//  compassionate conduct, or boosting one step up on progress/booking under
//  enthusiastic or appreciative conduct, each with modifier_probability.
EmotionDist transition_distribution(const RuleTable& table, const AppraisalContext& ctx);

// Draw from the same process with caller-supplied uniforms: u_cell picks the
// table outcome by inverse CDF, u_mod < modifier_probability applies the
// conduct modifier. Equal uniforms couple draws across conducts.
UserEmotion sample_transition(const RuleTable& table, const AppraisalContext& ctx, double u_cell,
                              double u_mod);

struct AgendaItem {
  enum class Kind { kConstraints = 0, kRequests, kBooking };
  Kind kind = Kind::kConstraints;
  std::string domain;
  friend bool operator==(const AgendaItem&, const AgendaItem&) = default;
};

// What the user has obtained so far in one domain.
struct DomainProgress {
  std::optional<std::size_t> offered;
  std::set<std::string> answered;
  bool booked = false;
  bool alternative_active = false;
  friend bool operator==(const DomainProgress&, const DomainProgress&) = default;
};

struct UserState {
  UserGoal goal;
  std::vector<AgendaItem> agenda;      // pending items, top at the back
  std::optional<AgendaItem> current;   // item the user is waiting on
  UserEmotion emotion = UserEmotion::kNeutral;
  int failures = 0;
  int turn = 0;
  Persona persona;
  std::map<std::string, DomainProgress> ledger;
  bool started = false;
  bool closed = false;
  Rng rng;
  friend bool operator==(const UserState&, const UserState&) = default;
};

struct Transition {
  AppraisalEvent event = AppraisalEvent::kOffTopic;
  Conduct effective_conduct = Conduct::kNeutral;
  UserEmotion next_emotion = UserEmotion::kNeutral;
  int failures = 0;
  bool resolved = false;       // the current agenda item is done
  bool goal_complete = false;
  bool escalated = false;
  std::map<std::string, DomainProgress> ledger;  // updated copy
};

struct UserTurn {
  UserEmotion emotion = UserEmotion::kNeutral;
  std::vector<SemanticAct> acts;
  std::string utterance;
  bool closing = false;  // the user said goodbye
};

// Seeds the agenda with every domain's constraints, then requests, then
// booking, in goal order. Initial emotion is the persona disposition of the
// first domain (neutral when absent).
UserState init_session(const UserGoal& goal, const Persona& persona, std::uint64_t seed);

// Classifies the system response against the item the user waits on.
// Priority: violation > no_offer_invalid > no_offer_valid > booking_success >
// progress > repeat_offense (after an earlier failure) / off_topic.
AppraisalEvent classify_event(const UserState& state, std::span<const SemanticAct> acts,
                              const Ontology& ontology, bool* resolved = nullptr,
                              std::map<std::string, DomainProgress>* ledger = nullptr);

class UserSimulator {
 public:
  UserSimulator(const Ontology& ontology, RuleTable rules, CueLexicon lexicon);
  explicit UserSimulator(const Ontology& ontology)
      : UserSimulator(ontology, RuleTable::defaults(), CueLexicon::defaults()) {}

  // Appraisal with explicit uniforms; does not touch the state.
  Transition appraise(const UserState& state, std::span<const SemanticAct> acts, Conduct conduct,
                      double u_cell, double u_mod) const;

  // Opening user turn (pops the first agenda item).
  UserTurn start(UserState& state) const;

  // Appraises the system turn, updates the state and produces the next user
  // turn. Throws SessionClosedError after the user has said goodbye.
  UserTurn respond(UserState& state, std::span<const SemanticAct> acts, Conduct conduct) const;

  const Ontology& ontology() const { return *ontology_; }
  const RuleTable& rules() const { return rules_; }
  const CueLexicon& lexicon() const { return lexicon_; }

 private:
  std::vector<SemanticAct> acts_for(const UserState& state, const AgendaItem& item) const;
  std::string surface(UserState& state, const std::vector<SemanticAct>& acts,
                      UserEmotion emotion) const;

  const Ontology* ontology_;
  RuleTable rules_;
  CueLexicon lexicon_;
};

// Effective conduct after eligibility (a blocked conduct acts as neutral).
Conduct effective_conduct(Conduct conduct, std::span<const SemanticAct> acts);

}  // namespace affectod

#endif  // AFFECTOD_USERSIM_H_
