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

#ifndef AFFECTOD_GOAL_H_
#define AFFECTOD_GOAL_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affectod/ontology.h"
#include "affectod/rng.h"

namespace affectod {

struct DomainGoal {
  std::string domain;
  // Constraints the user states first.
  Constraints constraints;
  // Set only for unsatisfiable goals: what the user falls back to after the
  // system correctly reports that nothing matches.
  std::optional<Constraints> alternative;
  std::vector<std::string> requests;
  // Booking requirements (e.g. people, day); empty when no booking is needed.
  std::map<std::string, std::string> booking;

  bool unsatisfiable() const { return alternative.has_value(); }
  // Constraints an offered entity has to satisfy for the task to count.
  const Constraints& final_constraints() const { return alternative ? *alternative : constraints; }
  bool needs_booking() const { return !booking.empty(); }

  friend bool operator==(const DomainGoal&, const DomainGoal&) = default;
};

struct UserGoal {
  std::vector<DomainGoal> domains;  // in the order the user pursues them

  const DomainGoal* find(std::string_view domain) const;
  bool unsatisfiable() const;

  friend bool operator==(const UserGoal&, const UserGoal&) = default;
};

struct GoalConfig {
  double multi_domain_probability = 0.4;
  double unsatisfiable_probability = 0.1;
  double booking_probability = 0.5;
  int min_constraints = 2;
  int max_constraints = 3;
  int min_requests = 1;
  int max_requests = 2;
};

// Throws ConfigError on an empty ontology or out-of-range probabilities.
UserGoal sample_goal(const Ontology& ontology, Rng& rng, const GoalConfig& config = {});

// Throws ConfigError when a goal breaks the schema (constraints on
// non-informable slots, requests on non-requestable slots, ...).
void validate_goal(const UserGoal& goal, const Ontology& ontology);

// Human-readable instructions for trial participants.
std::string render_goal_text(const UserGoal& goal);

void to_json(Json& j, const DomainGoal& g);
void from_json(const Json& j, DomainGoal& g);
void to_json(Json& j, const UserGoal& g);
void from_json(const Json& j, UserGoal& g);

}  // namespace affectod

#endif  // AFFECTOD_GOAL_H_
