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

#include "affectod/usersim.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "affectod/errors.h"
#include "affectod/nlg.h"

namespace affectod {
namespace {

using E = UserEmotion;
using Ev = AppraisalEvent;

constexpr std::array<std::string_view, kNumEvents> kEventNames = {
    "progress",         "violation",       "repeat_offense", "no_offer_valid",
    "no_offer_invalid", "booking_success", "off_topic"};

bool is_negative(E e) { return e == E::kDissatisfied || e == E::kAbusive || e == E::kFearful; }

E soften(E e) {
  switch (e) {
    case E::kAbusive: return E::kDissatisfied;
    case E::kDissatisfied:
    case E::kFearful: return E::kNeutral;
    default: return e;
  }
}

E boost(E e) {
  switch (e) {
    case E::kAbusive: return E::kDissatisfied;
    case E::kDissatisfied:
    case E::kFearful: return E::kNeutral;
    case E::kNeutral:
    case E::kApologetic: return E::kSatisfied;
    default: return e;
  }
}

bool softening_event(Ev ev) {
  return ev == Ev::kViolation || ev == Ev::kRepeatOffense || ev == Ev::kNoOfferValid ||
         ev == Ev::kNoOfferInvalid;
}
bool boosting_event(Ev ev) { return ev == Ev::kProgress || ev == Ev::kBookingSuccess; }

bool soothing(Conduct c) { return c == Conduct::kApologetic || c == Conduct::kCompassionate; }
bool uplifting(Conduct c) { return c == Conduct::kEnthusiastic || c == Conduct::kAppreciative; }

// Outcome mapping of the conduct modifier, or nullopt when it does not apply.
std::optional<E (*)(E)> modifier_of(const AppraisalContext& ctx) {
  if (soothing(ctx.conduct) && softening_event(ctx.event)) return &soften;
  if (uplifting(ctx.conduct) && boosting_event(ctx.event)) return &boost;
  return std::nullopt;
}

bool repairs(const AppraisalContext& ctx) {
  if (ctx.event != Ev::kProgress || !is_negative(ctx.emotion)) return false;
  if (ctx.emotion == E::kFearful) return ctx.conduct == Conduct::kCompassionate;
  return ctx.conduct == Conduct::kApologetic;
}

std::optional<E> forced(const AppraisalContext& ctx) {
  if (ctx.escalate) return E::kAbusive;
  if (ctx.goal_complete) return ctx.emotion == E::kExcited ? E::kExcited : E::kSatisfied;
  if (repairs(ctx)) return E::kNeutral;
  return std::nullopt;
}

EmotionDist ramped_cell(const RuleTable& t, const AppraisalContext& ctx) {
  EmotionDist d = t.cell(ctx.emotion, ctx.event);
  if (ctx.event != Ev::kViolation || t.impatience_per_turn <= 0.0) return d;
  // Move mass from non-negative outcomes onto dissatisfied.
  double movable = 0.0;
  for (E e : kAllEmotions)
    if (!is_negative(e)) movable += d[index_of(e)];
  if (movable <= 0.0) return d;
  const double shift = std::min(movable, t.impatience_per_turn * ctx.turn);
  const double keep = (movable - shift) / movable;
  for (E e : kAllEmotions)
    if (!is_negative(e)) d[index_of(e)] *= keep;
  d[index_of(E::kDissatisfied)] += shift;
  return d;
}

double sum(const EmotionDist& d) {
  double s = 0.0;
  for (double p : d) s += p;
  return s;
}

EmotionDist dist_from_json(const Json& j) {
  EmotionDist d{};
  for (auto it = j.begin(); it != j.end(); ++it) d[index_of(parse_emotion(it.key()))] = it.value().get<double>();
  return d;
}

Json dist_to_json(const EmotionDist& d) {
  Json j = Json::object();
  for (E e : kAllEmotions)
    if (d[index_of(e)] > 0.0) j[std::string(name_of(e))] = d[index_of(e)];
  return j;
}

template <typename K>
K draw(const std::map<K, double>& m, Rng& rng) {
  std::vector<double> w;
  std::vector<K> keys;
  for (const auto& [k, p] : m) {
    keys.push_back(k);
    w.push_back(p);
  }
  return keys[rng.categorical(w)];
}

template <typename K>
void check_categorical(const std::map<K, double>& m, const std::string& what) {
  if (m.empty()) throw ConfigError(what + ": empty distribution");
  double s = 0.0;
  for (const auto& [k, p] : m) {
    if (!(p >= 0.0)) throw ConfigError(what + ": negative probability");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError(what + ": probabilities sum to " + std::to_string(s));
}

std::string capitalise(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string constraint_phrase(const std::string& slot, const std::string& value) {
  if (value == kDontCare) return "any " + slot + " is fine";
  if (slot == "area") return "in the " + value + " area";
  if (slot == "food") return "serving " + value + " food";
  if (slot == "pricerange") return "in the " + value + " price range";
  if (slot == "stars") return "rated " + value;
  if (slot == "type") return "that is a " + value;
  if (slot == "entrance") return "with " + value + " entrance";
  return "with " + slot + " " + value;
}

const std::array<std::string_view, 3> kOpeners = {"I need a {d} ", "I am looking for a {d} ",
                                                  "Can you find me a {d} "};
const std::array<std::string_view, 2> kAskers = {"Could you give me the ", "What is the "};

}  // namespace

std::string_view name_of(AppraisalEvent e) { return kEventNames[index_of(e)]; }

AppraisalEvent parse_event(std::string_view s) {
  for (std::size_t i = 0; i < kNumEvents; ++i)
    if (kEventNames[i] == s) return static_cast<AppraisalEvent>(i);
  throw std::invalid_argument("unknown appraisal event '" + std::string(s) + "'");
}

bool is_failure(AppraisalEvent e) {
  return e == Ev::kViolation || e == Ev::kRepeatOffense || e == Ev::kNoOfferInvalid ||
         e == Ev::kOffTopic;
}

int valence_rank(UserEmotion e) {
  switch (e) {
    case E::kAbusive: return -2;
    case E::kDissatisfied:
    case E::kFearful: return -1;
    case E::kSatisfied:
    case E::kExcited: return 1;
    default: return 0;
  }
}

Conduct effective_conduct(Conduct conduct, std::span<const SemanticAct> acts) {
  return conduct_eligible(conduct, acts) ? conduct : Conduct::kNeutral;
}

// ---- persona ---------------------------------------------------------------

void Persona::validate() const {
  if (patience < 1) throw ConfigError("persona patience must be >= 1");
  if (!(expressiveness >= 0.0 && expressiveness <= 1.0))
    throw ConfigError("persona expressiveness must be in [0,1]");
}

PersonaDistribution PersonaDistribution::defaults() {
  PersonaDistribution d;
  d.dispositions["restaurant"] = {{E::kNeutral, 0.9}, {E::kExcited, 0.1}};
  d.dispositions["hotel"] = {{E::kNeutral, 0.95}, {E::kExcited, 0.05}};
  d.dispositions["attraction"] = {{E::kNeutral, 0.6}, {E::kExcited, 0.4}};
  d.patience = {{2, 0.3}, {3, 0.5}, {4, 0.2}};
  d.expressiveness = {{1.0, 1.0}};
  return d;
}

void PersonaDistribution::validate() const {
  for (const auto& [domain, m] : dispositions) check_categorical(m, "disposition of " + domain);
  check_categorical(patience, "patience");
  check_categorical(expressiveness, "expressiveness");
  for (const auto& [k, p] : patience)
    if (k < 1) throw ConfigError("patience values must be >= 1");
  for (const auto& [k, p] : expressiveness)
    if (k < 0.0 || k > 1.0) throw ConfigError("expressiveness values must be in [0,1]");
}

Persona sample_persona(const PersonaDistribution& dist, Rng& rng) {
  dist.validate();
  Persona p;
  for (const auto& [domain, m] : dist.dispositions) {
    const E e = draw(m, rng);
    if (e != E::kNeutral) p.dispositions[domain] = e;
  }
  p.patience = draw(dist.patience, rng);
  p.expressiveness = draw(dist.expressiveness, rng);
  return p;
}

void to_json(Json& j, const Persona& p) {
  j = Json{{"dispositions", Json::object()},
           {"patience", p.patience},
           {"expressiveness", p.expressiveness}};
  for (const auto& [d, e] : p.dispositions) j["dispositions"][d] = std::string(name_of(e));
}

void from_json(const Json& j, Persona& p) {
  p = Persona{};
  for (auto it = j.at("dispositions").begin(); it != j.at("dispositions").end(); ++it)
    p.dispositions[it.key()] = parse_emotion(it.value().get<std::string>());
  p.patience = j.at("patience").get<int>();
  p.expressiveness = j.at("expressiveness").get<double>();
}

Json persona_distribution_to_json(const PersonaDistribution& d) {
  Json j;
  for (const auto& [domain, m] : d.dispositions)
    for (const auto& [e, p] : m) j["dispositions"][domain][std::string(name_of(e))] = p;
  for (const auto& [k, p] : d.patience) j["patience"][std::to_string(k)] = p;
  j["expressiveness"] = Json::array();
  for (const auto& [k, p] : d.expressiveness) j["expressiveness"].push_back({k, p});
  return j;
}

PersonaDistribution persona_distribution_from_json(const Json& j) {
  PersonaDistribution d;
  try {
    if (j.contains("dispositions"))
      for (auto it = j["dispositions"].begin(); it != j["dispositions"].end(); ++it)
        for (auto e = it.value().begin(); e != it.value().end(); ++e)
          d.dispositions[it.key()][parse_emotion(e.key())] = e.value().get<double>();
    for (auto it = j.at("patience").begin(); it != j.at("patience").end(); ++it)
      d.patience[std::stoi(it.key())] = it.value().get<double>();
    for (const auto& pair : j.at("expressiveness"))
      d.expressiveness[pair.at(0).get<double>()] = pair.at(1).get<double>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed persona distribution: ") + e.what());
  }
  d.validate();
  return d;
}

// ---- rule table ------------------------------------------------------------

RuleTable RuleTable::defaults() {
  RuleTable t;
  auto set = [&](E from, Ev ev, std::initializer_list<std::pair<E, double>> outs) {
    EmotionDist d{};
    for (auto [e, p] : outs) d[index_of(e)] = p;
    t.cells[index_of(from)][index_of(ev)] = d;
  };
  set(E::kNeutral, Ev::kProgress, {{E::kNeutral, 0.85}, {E::kSatisfied, 0.15}});
  set(E::kSatisfied, Ev::kProgress, {{E::kSatisfied, 0.7}, {E::kNeutral, 0.3}});
  set(E::kDissatisfied, Ev::kProgress, {{E::kDissatisfied, 0.5}, {E::kNeutral, 0.5}});
  set(E::kExcited, Ev::kProgress, {{E::kExcited, 0.9}, {E::kNeutral, 0.1}});
  set(E::kFearful, Ev::kProgress, {{E::kFearful, 0.5}, {E::kNeutral, 0.5}});
  set(E::kApologetic, Ev::kProgress, {{E::kNeutral, 1.0}});
  set(E::kAbusive, Ev::kProgress, {{E::kAbusive, 0.4}, {E::kDissatisfied, 0.6}});

  set(E::kNeutral, Ev::kViolation, {{E::kDissatisfied, 0.6}, {E::kNeutral, 0.4}});
  set(E::kSatisfied, Ev::kViolation, {{E::kDissatisfied, 0.5}, {E::kNeutral, 0.5}});
  set(E::kDissatisfied, Ev::kViolation, {{E::kDissatisfied, 0.8}, {E::kAbusive, 0.2}});
  set(E::kExcited, Ev::kViolation, {{E::kDissatisfied, 0.5}, {E::kNeutral, 0.5}});
  set(E::kFearful, Ev::kViolation, {{E::kDissatisfied, 0.6}, {E::kFearful, 0.4}});
  set(E::kApologetic, Ev::kViolation, {{E::kDissatisfied, 0.6}, {E::kNeutral, 0.4}});
  set(E::kAbusive, Ev::kViolation, {{E::kAbusive, 1.0}});

  set(E::kNeutral, Ev::kRepeatOffense, {{E::kDissatisfied, 0.7}, {E::kNeutral, 0.3}});
  set(E::kSatisfied, Ev::kRepeatOffense, {{E::kDissatisfied, 0.6}, {E::kNeutral, 0.4}});
  set(E::kDissatisfied, Ev::kRepeatOffense, {{E::kDissatisfied, 0.7}, {E::kAbusive, 0.3}});
  set(E::kExcited, Ev::kRepeatOffense, {{E::kDissatisfied, 0.6}, {E::kNeutral, 0.4}});
  set(E::kFearful, Ev::kRepeatOffense, {{E::kDissatisfied, 0.5}, {E::kFearful, 0.5}});
  set(E::kApologetic, Ev::kRepeatOffense, {{E::kDissatisfied, 0.7}, {E::kNeutral, 0.3}});
  set(E::kAbusive, Ev::kRepeatOffense, {{E::kAbusive, 1.0}});

  set(E::kNeutral, Ev::kNoOfferValid, {{E::kFearful, 0.5}, {E::kApologetic, 0.2}, {E::kNeutral, 0.3}});
  set(E::kSatisfied, Ev::kNoOfferValid, {{E::kFearful, 0.4}, {E::kNeutral, 0.6}});
  set(E::kDissatisfied, Ev::kNoOfferValid, {{E::kFearful, 0.5}, {E::kDissatisfied, 0.5}});
  set(E::kExcited, Ev::kNoOfferValid, {{E::kFearful, 0.6}, {E::kNeutral, 0.4}});
  set(E::kFearful, Ev::kNoOfferValid, {{E::kFearful, 1.0}});
  set(E::kApologetic, Ev::kNoOfferValid, {{E::kFearful, 0.5}, {E::kApologetic, 0.5}});
  set(E::kAbusive, Ev::kNoOfferValid, {{E::kAbusive, 0.5}, {E::kDissatisfied, 0.5}});

  set(E::kNeutral, Ev::kNoOfferInvalid, {{E::kDissatisfied, 0.7}, {E::kNeutral, 0.3}});
  set(E::kSatisfied, Ev::kNoOfferInvalid, {{E::kDissatisfied, 0.6}, {E::kNeutral, 0.4}});
  set(E::kDissatisfied, Ev::kNoOfferInvalid, {{E::kDissatisfied, 0.7}, {E::kAbusive, 0.3}});
  set(E::kExcited, Ev::kNoOfferInvalid, {{E::kDissatisfied, 0.6}, {E::kNeutral, 0.4}});
  set(E::kFearful, Ev::kNoOfferInvalid, {{E::kDissatisfied, 0.6}, {E::kFearful, 0.4}});
  set(E::kApologetic, Ev::kNoOfferInvalid, {{E::kDissatisfied, 0.7}, {E::kNeutral, 0.3}});
  set(E::kAbusive, Ev::kNoOfferInvalid, {{E::kAbusive, 1.0}});

  set(E::kNeutral, Ev::kBookingSuccess, {{E::kSatisfied, 0.6}, {E::kNeutral, 0.4}});
  set(E::kSatisfied, Ev::kBookingSuccess, {{E::kSatisfied, 1.0}});
  set(E::kDissatisfied, Ev::kBookingSuccess, {{E::kNeutral, 0.6}, {E::kDissatisfied, 0.4}});
  set(E::kExcited, Ev::kBookingSuccess, {{E::kExcited, 1.0}});
  set(E::kFearful, Ev::kBookingSuccess, {{E::kNeutral, 0.7}, {E::kFearful, 0.3}});
  set(E::kApologetic, Ev::kBookingSuccess, {{E::kSatisfied, 0.5}, {E::kNeutral, 0.5}});
  set(E::kAbusive, Ev::kBookingSuccess, {{E::kDissatisfied, 0.6}, {E::kAbusive, 0.4}});

  set(E::kNeutral, Ev::kOffTopic, {{E::kNeutral, 0.7}, {E::kDissatisfied, 0.3}});
  set(E::kSatisfied, Ev::kOffTopic, {{E::kNeutral, 0.6}, {E::kSatisfied, 0.4}});
  set(E::kDissatisfied, Ev::kOffTopic, {{E::kDissatisfied, 1.0}});
  set(E::kExcited, Ev::kOffTopic, {{E::kExcited, 0.6}, {E::kNeutral, 0.4}});
  set(E::kFearful, Ev::kOffTopic, {{E::kFearful, 1.0}});
  set(E::kApologetic, Ev::kOffTopic, {{E::kNeutral, 0.8}, {E::kApologetic, 0.2}});
  set(E::kAbusive, Ev::kOffTopic, {{E::kAbusive, 1.0}});
  return t;
}

void RuleTable::validate() const {
  for (E e : kAllEmotions) {
    for (Ev ev : kAllEvents) {
      const EmotionDist& d = cell(e, ev);
      for (double p : d)
        if (!(p >= 0.0)) throw ConfigError("rule table: negative probability");
      if (std::abs(sum(d) - 1.0) > 1e-9)
        throw ConfigError("rule table cell " + std::string(name_of(e)) + "/" +
                          std::string(name_of(ev)) + " does not sum to 1");
      if (ev != Ev::kNoOfferValid && e != E::kFearful && d[index_of(E::kFearful)] > 0.0)
        throw ConfigError("rule table: fearful is only reachable through no_offer_valid");
    }
  }
  if (modifier_probability < 0.0 || modifier_probability > 1.0)
    throw ConfigError("rule table: modifier_probability must be in [0,1]");
  if (impatience_per_turn < 0.0) throw ConfigError("rule table: impatience_per_turn must be >= 0");
}

Json rule_table_to_json(const RuleTable& t) {
  Json j;
  j["modifier_probability"] = t.modifier_probability;
  j["impatience_per_turn"] = t.impatience_per_turn;
  for (E e : kAllEmotions)
    for (Ev ev : kAllEvents)
      j["cells"][std::string(name_of(e))][std::string(name_of(ev))] = dist_to_json(t.cell(e, ev));
  return j;
}

RuleTable rule_table_from_json(const Json& j) {
  RuleTable t;
  try {
    t.modifier_probability = j.value("modifier_probability", 0.5);
    t.impatience_per_turn = j.value("impatience_per_turn", 0.05);
    const Json& cells = j.at("cells");
    for (E e : kAllEmotions)
      for (Ev ev : kAllEvents)
        t.cells[index_of(e)][index_of(ev)] =
            dist_from_json(cells.at(std::string(name_of(e))).at(std::string(name_of(ev))));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed rule table: ") + e.what());
  }
  t.validate();
  return t;
}

EmotionDist transition_distribution(const RuleTable& table, const AppraisalContext& ctx) {
  EmotionDist out{};
  if (auto f = forced(ctx)) {
    out[index_of(*f)] = 1.0;
    return out;
  }
  const EmotionDist base = ramped_cell(table, ctx);
  const auto mod = modifier_of(ctx);
  const double m = mod ? table.modifier_probability : 0.0;
  for (E e : kAllEmotions) {
    const double p = base[index_of(e)];
    if (p == 0.0) continue;
    out[index_of(e)] += p * (1.0 - m);
    if (mod) out[index_of((*mod)(e))] += p * m;
  }
  return out;
}

UserEmotion sample_transition(const RuleTable& table, const AppraisalContext& ctx, double u_cell,
                              double u_mod) {
  if (auto f = forced(ctx)) return *f;
  const EmotionDist base = ramped_cell(table, ctx);
  E pick = E::kNeutral;
  bool found = false;
  double acc = 0.0;
  for (E e : kAllEmotions) {
    const double p = base[index_of(e)];
    if (p <= 0.0) continue;
    pick = e;  // last positive outcome absorbs rounding
    acc += p;
    if (u_cell < acc) {
      found = true;
      break;
    }
  }
  (void)found;
  if (auto mod = modifier_of(ctx); mod && u_mod < table.modifier_probability) pick = (*mod)(pick);
  return pick;
}

// ---- session ---------------------------------------------------------------

UserState init_session(const UserGoal& goal, const Persona& persona, std::uint64_t seed) {
  persona.validate();
  UserState s;
  s.goal = goal;
  s.persona = persona;
  s.rng = Rng(seed);
  for (auto it = goal.domains.rbegin(); it != goal.domains.rend(); ++it) {
    if (it->needs_booking()) s.agenda.push_back({AgendaItem::Kind::kBooking, it->domain});
    if (!it->requests.empty()) s.agenda.push_back({AgendaItem::Kind::kRequests, it->domain});
    s.agenda.push_back({AgendaItem::Kind::kConstraints, it->domain});
  }
  for (const auto& g : goal.domains) s.ledger[g.domain] = DomainProgress{};
  if (!goal.domains.empty()) {
    auto it = persona.dispositions.find(goal.domains.front().domain);
    if (it != persona.dispositions.end()) s.emotion = it->second;
  }
  return s;
}

namespace {

bool item_done(const UserState& s, const AgendaItem& item,
               const std::map<std::string, DomainProgress>& ledger, const Ontology& ontology) {
  const DomainGoal* g = s.goal.find(item.domain);
  const DomainProgress& p = ledger.at(item.domain);
  switch (item.kind) {
    case AgendaItem::Kind::kConstraints: {
      if (!p.offered) return false;
      if (g->unsatisfiable() && !p.alternative_active) return false;
      const Constraints& c = p.alternative_active ? *g->alternative : g->constraints;
      return Ontology::satisfies(ontology.entities(item.domain)[*p.offered], c);
    }
    case AgendaItem::Kind::kRequests:
      return std::all_of(g->requests.begin(), g->requests.end(),
                         [&](const std::string& r) { return p.answered.count(r) > 0; });
    case AgendaItem::Kind::kBooking:
      return p.booked;
  }
  return false;
}

}  // namespace

AppraisalEvent classify_event(const UserState& state, std::span<const SemanticAct> acts,
                              const Ontology& ontology, bool* resolved,
                              std::map<std::string, DomainProgress>* ledger_out) {
  auto ledger = state.ledger;
  if (resolved) *resolved = false;
  if (!state.current) {
    if (ledger_out) *ledger_out = ledger;
    return state.failures > 0 ? Ev::kRepeatOffense : Ev::kOffTopic;
  }
  const AgendaItem& item = *state.current;
  const DomainGoal* g = state.goal.find(item.domain);
  DomainProgress& p = ledger[item.domain];
  const bool unsat_now = g->unsatisfiable() && !p.alternative_active;
  const Constraints& eff = p.alternative_active ? *g->alternative : g->constraints;
  const auto& entities = ontology.entities(item.domain);

  bool violation = false, no_offer_invalid = false, no_offer_valid = false, booking = false,
       progress = false;
  for (const auto& a : acts) {
    if (a.domain != item.domain) continue;
    const std::string slot = a.slot.value_or("");
    switch (a.intent) {
      case Intent::kInform:
      case Intent::kRecommend:
      case Intent::kConfirm: {
        if (!a.value) break;
        if (slot == kNameSlot) {
          const std::size_t e = ontology.find_entity(item.domain, *a.value);
          if (e == Ontology::npos || unsat_now || !Ontology::satisfies(entities[e], eff)) {
            violation = true;
          } else if (a.intent != Intent::kConfirm) {
            if (p.offered != e) {
              p.answered.clear();
              p.offered = e;
            }
            if (item.kind == AgendaItem::Kind::kConstraints) progress = true;
          }
          break;
        }
        auto c = eff.find(slot);
        if (c != eff.end() && c->second != kDontCare && c->second != *a.value) {
          violation = true;
          break;
        }
        if (a.intent != Intent::kInform || !p.offered) break;
        auto have = entities[*p.offered].find(slot);
        if (have != entities[*p.offered].end() && have->second != *a.value) {
          violation = true;
          break;
        }
        if (std::find(g->requests.begin(), g->requests.end(), slot) != g->requests.end() &&
            !p.answered.count(slot)) {
          p.answered.insert(slot);
          if (item.kind == AgendaItem::Kind::kRequests) progress = true;
        }
        break;
      }
      case Intent::kBook: {
        if (!a.value) break;
        const std::size_t e = ontology.entity_for_reference(item.domain, *a.value);
        if (e == Ontology::npos || unsat_now || !Ontology::satisfies(entities[e], eff)) {
          violation = true;
        } else if (item.kind == AgendaItem::Kind::kBooking) {
          p.booked = true;
          p.offered = e;
          booking = true;
        }
        break;
      }
      case Intent::kNoOffer:
        if (item.kind == AgendaItem::Kind::kConstraints && unsat_now) {
          no_offer_valid = true;
          p.alternative_active = true;
        } else {
          no_offer_invalid = true;
        }
        break;
      default:
        break;
    }
  }

  Ev ev;
  if (violation) ev = Ev::kViolation;
  else if (no_offer_invalid) ev = Ev::kNoOfferInvalid;
  else if (no_offer_valid) ev = Ev::kNoOfferValid;
  else if (booking) ev = Ev::kBookingSuccess;
  else if (progress) ev = Ev::kProgress;
  else ev = state.failures > 0 ? Ev::kRepeatOffense : Ev::kOffTopic;

  if (resolved) *resolved = !is_failure(ev) && item_done(state, item, ledger, ontology);
  if (ledger_out) *ledger_out = std::move(ledger);
  return ev;
}

UserSimulator::UserSimulator(const Ontology& ontology, RuleTable rules, CueLexicon lexicon)
    : ontology_(&ontology), rules_(std::move(rules)), lexicon_(std::move(lexicon)) {
  rules_.validate();
}

Transition UserSimulator::appraise(const UserState& state, std::span<const SemanticAct> acts,
                                   Conduct conduct, double u_cell, double u_mod) const {
  Transition t;
  t.effective_conduct = effective_conduct(conduct, acts);
  t.event = classify_event(state, acts, *ontology_, &t.resolved, &t.ledger);
  t.failures = is_failure(t.event) ? state.failures + 1
               : (t.event == Ev::kProgress || t.event == Ev::kBookingSuccess ||
                  t.event == Ev::kNoOfferValid)
                   ? 0
                   : state.failures;
  if (t.resolved) {
    UserState probe = state;
    probe.ledger = t.ledger;
    t.goal_complete = std::all_of(state.agenda.begin(), state.agenda.end(), [&](const AgendaItem& it) {
      return item_done(probe, it, t.ledger, *ontology_);
    });
  }
  t.escalated = is_failure(t.event) && t.failures >= state.persona.patience;
  AppraisalContext ctx{state.emotion, t.event, t.effective_conduct, state.turn, t.goal_complete,
                       t.escalated};
  t.next_emotion = sample_transition(rules_, ctx, u_cell, u_mod);
  return t;
}

std::vector<SemanticAct> UserSimulator::acts_for(const UserState& state,
                                                 const AgendaItem& item) const {
  const DomainGoal* g = state.goal.find(item.domain);
  const DomainProgress& p = state.ledger.at(item.domain);
  std::vector<SemanticAct> acts;
  switch (item.kind) {
    case AgendaItem::Kind::kConstraints: {
      const Constraints& c = p.alternative_active ? *g->alternative : g->constraints;
      for (const auto& [slot, value] : c) acts.push_back(SemanticAct::inform(item.domain, slot, value));
      break;
    }
    case AgendaItem::Kind::kRequests:
      for (const auto& r : g->requests)
        if (!p.answered.count(r)) acts.push_back(SemanticAct::request(item.domain, r));
      break;
    case AgendaItem::Kind::kBooking:
      for (const auto& [slot, value] : g->booking)
        acts.push_back(SemanticAct::inform(item.domain, slot, value));
      acts.push_back(SemanticAct::book(item.domain));
      break;
  }
  return acts;
}

std::string UserSimulator::surface(UserState& state, const std::vector<SemanticAct>& acts,
                                   UserEmotion emotion) const {
  std::vector<std::string> constraints, requests, booking;
  std::string domain;
  bool bye = false, book = false;
  for (const auto& a : acts) {
    if (a.intent == Intent::kBye) bye = true;
    if (a.domain != kGeneralDomain) domain = a.domain;
    const DomainSchema* d = ontology_->find_domain(a.domain);
    if (a.intent == Intent::kInform && d && d->is_booking_slot(*a.slot)) {
      booking.push_back(*a.slot == "people" ? "for " + *a.value + " people"
                        : *a.slot == "day"  ? "on " + *a.value
                                            : *a.slot + " " + *a.value);
    } else if (a.intent == Intent::kInform) {
      constraints.push_back(constraint_phrase(*a.slot, *a.value));
    } else if (a.intent == Intent::kRequest) {
      requests.push_back(*a.slot);
    } else if (a.intent == Intent::kBook) {
      book = true;
    }
  }
  std::string text;
  if (!constraints.empty()) {
    std::string opener(kOpeners[state.rng.below(kOpeners.size())]);
    opener.replace(opener.find("{d}"), 3, domain);
    text = opener + join(constraints, ", ") + ".";
  }
  if (!requests.empty()) {
    if (!text.empty()) text += ' ';
    text += std::string(kAskers[state.rng.below(kAskers.size())]) + join(requests, " and ") + "?";
  }
  if (book) {
    if (!text.empty()) text += ' ';
    text += "Please book it";
    if (!booking.empty()) text += " " + join(booking, " ");
    text += ".";
  }
  if (bye) text = "That is all I need, goodbye.";

  const bool express = state.rng.uniform() < state.persona.expressiveness;
  const auto& cues = lexicon_.of(emotion);
  if (!cues.empty()) {
    const std::string& cue = cues[state.rng.below(cues.size())];
    if (express) text = capitalise(cue) + ". " + text;
  }
  return text;
}

UserTurn UserSimulator::start(UserState& state) const {
  if (state.closed || state.started) throw SessionClosedError("user session already started");
  state.started = true;
  UserTurn out;
  out.emotion = state.emotion;
  if (state.agenda.empty()) {
    out.acts = {SemanticAct::bye()};
    out.closing = true;
    state.closed = true;
  } else {
    state.current = state.agenda.back();
    state.agenda.pop_back();
    out.acts = acts_for(state, *state.current);
  }
  out.utterance = surface(state, out.acts, out.emotion);
  return out;
}

UserTurn UserSimulator::respond(UserState& state, std::span<const SemanticAct> acts,
                                Conduct conduct) const {
  if (state.closed) throw SessionClosedError("user already said goodbye");
  if (!state.started) throw SessionClosedError("user session not started");
  const double u_cell = state.rng.uniform();
  const double u_mod = state.rng.uniform();
  Transition t = appraise(state, acts, conduct, u_cell, u_mod);

  state.emotion = t.next_emotion;
  state.failures = t.failures;
  state.ledger = std::move(t.ledger);
  state.turn += 1;

  UserTurn out;
  out.emotion = state.emotion;
  if (t.resolved) {
    state.current.reset();
    while (!state.agenda.empty()) {
      AgendaItem next = state.agenda.back();
      state.agenda.pop_back();
      if (!item_done(state, next, state.ledger, *ontology_)) {
        state.current = next;
        break;
      }
    }
  }
  if (state.current) out.acts = acts_for(state, *state.current);
  // an item can be satisfied as a side effect of earlier offers
  while (state.current && out.acts.empty()) {
    state.current.reset();
    while (!state.agenda.empty()) {
      AgendaItem next = state.agenda.back();
      state.agenda.pop_back();
      if (!item_done(state, next, state.ledger, *ontology_)) {
        state.current = next;
        out.acts = acts_for(state, next);
        break;
      }
    }
  }
  if (!state.current) {
    out.acts = {SemanticAct::bye()};
    out.closing = true;
    state.closed = true;
  }
  out.utterance = surface(state, out.acts, out.emotion);
  return out;
}

}  // namespace affectod
