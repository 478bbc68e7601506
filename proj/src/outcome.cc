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

#include "affectod/outcome.h"

#include <set>

namespace affectod {

Verdict judge_outcome(const UserGoal& goal, const std::vector<Turn>& turns,
                      const Ontology& ontology) {
  Verdict v{true, true};
  for (const DomainGoal& g : goal.domains) {
    const auto& entities = ontology.entities(g.domain);
    const Constraints& want = g.final_constraints();

    std::set<std::size_t> offered;
    bool bad_offer = false;
    bool booked = false;
    for (const Turn& t : turns) {
      for (const SemanticAct& a : t.system_acts) {
        if (a.domain != g.domain || !a.value) continue;
        std::size_t idx = Ontology::npos;
        if ((a.intent == Intent::kRecommend || a.intent == Intent::kInform) && a.slot &&
            *a.slot == kNameSlot) {
          idx = ontology.find_entity(g.domain, *a.value);
        } else if (a.intent == Intent::kBook) {
          idx = ontology.entity_for_reference(g.domain, *a.value);
          if (idx != Ontology::npos && Ontology::satisfies(entities[idx], want)) booked = true;
        } else {
          continue;
        }
        if (idx == Ontology::npos || !Ontology::satisfies(entities[idx], want))
          bad_offer = true;
        else
          offered.insert(idx);
      }
    }
    if (bad_offer || offered.empty()) v.inform = false;

    bool requests_met = true;
    for (const auto& slot : g.requests) {
      bool found = false;
      for (const Turn& t : turns)
        for (const SemanticAct& a : t.system_acts)
          if (a.intent == Intent::kInform && a.domain == g.domain && a.slot && *a.slot == slot &&
              a.value)
            for (std::size_t idx : offered)
              if (entities[idx].at(slot) == *a.value) found = true;
      if (!found) requests_met = false;
    }
    if (!requests_met || (g.needs_booking() && !booked)) v.success = false;
  }
  v.success = v.success && v.inform;
  return v;
}

}  // namespace affectod
