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

#ifndef AFFECTOD_OUTCOME_H_
#define AFFECTOD_OUTCOME_H_

#include <vector>

#include "affectod/episode.h"
#include "affectod/goal.h"
#include "affectod/ontology.h"

namespace affectod {

struct Verdict {
  bool success = false;
  bool inform = false;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Task outcome of a finished dialogue, judged from the system acts alone.
//
// inform: every goal domain received at least one offer (recommend/inform of
// a name, or a booking reference) and every offered entity satisfies the
// domain's final constraints.
// success: inform, every requested slot was informed with the value of a
// correct offered entity, and every required booking carries the reference
// of an entity that satisfies the constraints.
Verdict judge_outcome(const UserGoal& goal, const std::vector<Turn>& turns,
                      const Ontology& ontology);

inline Verdict judge_outcome(const UserGoal& goal, const EpisodeRecord& episode,
                             const Ontology& ontology) {
  return judge_outcome(goal, episode.turns, ontology);
}

}  // namespace affectod

#endif  // AFFECTOD_OUTCOME_H_
