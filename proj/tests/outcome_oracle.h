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

#ifndef AFFECTOD_TESTS_OUTCOME_ORACLE_H_
#define AFFECTOD_TESTS_OUTCOME_ORACLE_H_

#include <string>
#include <vector>

#include "affectod/episode.h"
#include "affectod/goal.h"
#include "affectod/ontology.h"
#include "affectod/outcome.h"

namespace affectod::testing {

// Brute-force outcome checker, written against the definition only: offers
// are resolved by scanning the raw entity list, references are recomputed.
inline std::string reference_of(const std::string& domain, const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : domain + "/" + name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  const char* alphabet = "ABCDEFGHJKLMNPQRSTUVWXYZ23456789";
  std::string r;
  for (int i = 0; i < 8; ++i, h /= 32) r += alphabet[h % 32];
  return r;
}

inline bool fits(const Entity& e, const Constraints& c) {
  for (const auto& [slot, value] : c)
    if (value != "dontcare" && (!e.count(slot) || e.at(slot) != value)) return false;
  return true;
}

inline Verdict oracle(const UserGoal& goal, const std::vector<Turn>& turns, const Ontology& o) {
  bool inform = true, success = true;
  for (const auto& g : goal.domains) {
    const Constraints& want = g.alternative ? *g.alternative : g.constraints;
    std::vector<const Entity*> offers;
    bool bad = false, booked = false;
    for (const auto& t : turns)
      for (const auto& a : t.system_acts) {
        if (a.domain != g.domain || !a.value) continue;
        const Entity* hit = nullptr;
        const bool by_name = (a.intent == Intent::kRecommend || a.intent == Intent::kInform) &&
                             a.slot == std::optional<std::string>("name");
        if (!by_name && a.intent != Intent::kBook) continue;
        for (const Entity& e : o.entities(g.domain)) {
          if (by_name && e.at("name") == *a.value) hit = &e;
          if (!by_name && reference_of(g.domain, e.at("name")) == *a.value) hit = &e;
        }
        if (!hit || !fits(*hit, want)) {
          bad = true;
          continue;
        }
        offers.push_back(hit);
        if (!by_name) booked = true;
      }
    if (bad || offers.empty()) inform = false;
    for (const auto& r : g.requests) {
      bool got = false;
      for (const auto& t : turns)
        for (const auto& a : t.system_acts)
          if (a.intent == Intent::kInform && a.domain == g.domain && a.slot == r && a.value)
            for (const Entity* e : offers) got = got || e->at(r) == *a.value;
      if (!got) success = false;
    }
    if (!g.booking.empty() && !booked) success = false;
  }
  return {success && inform, inform};
}

}  // namespace affectod::testing

#endif  // AFFECTOD_TESTS_OUTCOME_ORACLE_H_
