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

#include "affectod/state.h"

#include <algorithm>

#include "affectod/errors.h"

namespace affectod {

MatchBucket bucket_of(std::size_t count) {
  if (count == 0) return MatchBucket::kNone;
  if (count == 1) return MatchBucket::kOne;
  if (count <= 4) return MatchBucket::kFew;
  return MatchBucket::kMany;
}

DialogueState DialogueState::initial(const Ontology& ontology) {
  DialogueState s;
  for (const auto& d : ontology.domains()) {
    DomainState ds;
    ds.match_count = ontology.entities(d.name).size();
    s.domains.push_back(std::move(ds));
  }
  return s;
}

const DomainState& DialogueState::at(const Ontology& ontology, std::string_view domain) const {
  const std::size_t i = ontology.domain_index(domain);
  if (i == Ontology::npos || i >= domains.size())
    throw TrackingError("unknown domain '" + std::string(domain) + "'");
  return domains[i];
}

DomainState& DialogueState::at(const Ontology& ontology, std::string_view domain) {
  return const_cast<DomainState&>(std::as_const(*this).at(ontology, domain));
}

DialogueState track(const DialogueState& prev, std::span<const SemanticAct> user_acts,
                    const Ontology& ontology) {
  if (user_acts.empty()) return prev;
  for (const auto& act : user_acts) {
    std::string why;
    if (!has_valid_shape(act, &why) || !ontology.accepts(act, &why))
      throw TrackingError("cannot track " + to_string(act) + ": " + why);
  }

  DialogueState next = prev;
  std::set<std::size_t> touched;
  for (const auto& act : user_acts) {
    if (act.intent == Intent::kBye) next.user_closed = true;
    if (act.domain == kGeneralDomain) continue;
    const std::size_t di = ontology.domain_index(act.domain);
    const DomainSchema& schema = ontology.domains()[di];
    DomainState& ds = next.domains[di];
    next.active_domain = act.domain;
    switch (act.intent) {
      case Intent::kInform:
        if (schema.is_informable(*act.slot)) {
          auto it = ds.constraints.find(*act.slot);
          if (it == ds.constraints.end() || it->second != *act.value) ds.no_offer_given = false;
          ds.constraints[*act.slot] = *act.value;
          touched.insert(di);
        } else if (schema.is_booking_slot(*act.slot)) {
          ds.booking_info[*act.slot] = *act.value;
        }
        break;
      case Intent::kRequest:
        ds.requested.insert(*act.slot);
        break;
      case Intent::kBook:
        if (!ds.booking_done) ds.booking_requested = true;
        break;
      default:
        break;
    }
  }
  for (std::size_t di : touched)
    next.domains[di].match_count =
        ontology.count_matches(ontology.domains()[di].name, next.domains[di].constraints);
  const bool same = std::equal(user_acts.begin(), user_acts.end(), prev.last_user_acts.begin(),
                               prev.last_user_acts.end());
  next.user_repeats = same ? prev.user_repeats + 1 : 0;
  next.last_user_acts.assign(user_acts.begin(), user_acts.end());
  return next;
}

void apply_system_acts(DialogueState& state, std::span<const SemanticAct> system_acts,
                       const Ontology& ontology) {
  state.last_system_acts.assign(system_acts.begin(), system_acts.end());
  for (const auto& act : system_acts) {
    if (act.domain == kGeneralDomain) continue;
    const std::size_t di = ontology.domain_index(act.domain);
    if (di == Ontology::npos) continue;
    DomainState& ds = state.domains[di];
    switch (act.intent) {
      case Intent::kInform:
      case Intent::kRecommend:
        if (act.slot && act.value) {
          if (*act.slot == kNameSlot) {
            const std::size_t e = ontology.find_entity(act.domain, *act.value);
            if (e != Ontology::npos) ds.offered = e;
          }
          ds.requested.erase(*act.slot);
        }
        break;
      case Intent::kBook:
        if (act.value) {
          const std::size_t e = ontology.entity_for_reference(act.domain, *act.value);
          if (e != Ontology::npos) ds.offered = e;
          ds.booking_done = true;
          ds.booking_requested = false;
        }
        break;
      case Intent::kNoOffer:
        ds.no_offer_given = true;
        break;
      default:
        break;
    }
  }
}

void push_history(DialogueState& state, std::string utterance, std::size_t keep) {
  state.history.push_back(std::move(utterance));
  while (state.history.size() > keep) state.history.pop_front();
}

std::optional<std::size_t> selected_entity(const DialogueState& state, const Ontology& ontology,
                                           std::string_view domain) {
  const DomainState& ds = state.at(ontology, domain);
  const auto& entities = ontology.entities(domain);
  if (ds.offered && Ontology::satisfies(entities[*ds.offered], ds.constraints)) return ds.offered;
  for (std::size_t i = 0; i < entities.size(); ++i)
    if (Ontology::satisfies(entities[i], ds.constraints)) return i;
  return std::nullopt;
}

}  // namespace affectod
