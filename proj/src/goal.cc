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

#include "affectod/goal.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "affectod/errors.h"

namespace affectod {

const DomainGoal* UserGoal::find(std::string_view domain) const {
  for (const auto& d : domains)
    if (d.domain == domain) return &d;
  return nullptr;
}

bool UserGoal::unsatisfiable() const {
  return std::any_of(domains.begin(), domains.end(),
                     [](const DomainGoal& d) { return d.unsatisfiable(); });
}

namespace {

const std::vector<std::string> kDays = {"monday", "tuesday", "wednesday", "thursday",
                                        "friday", "saturday", "sunday"};

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
}

// Changes one constrained slot so that nothing in the database matches.
// Returns false when every single-slot change still matches something.
bool break_constraints(const Ontology& ontology, const DomainSchema& schema, Constraints& c,
                       Rng& rng) {
  std::vector<std::string> slots;
  for (const auto& [slot, value] : c) slots.push_back(slot);
  rng.shuffle(slots.begin(), slots.end());
  for (const auto& slot : slots) {
    auto values = schema.informable.at(slot);
    rng.shuffle(values.begin(), values.end());
    for (const auto& v : values) {
      if (v == c.at(slot)) continue;
      Constraints trial = c;
      trial[slot] = v;
      if (ontology.count_matches(schema.name, trial) == 0) {
        c = std::move(trial);
        return true;
      }
    }
  }
  return false;
}

DomainGoal sample_domain_goal(const Ontology& ontology, const DomainSchema& schema, Rng& rng,
                              const GoalConfig& config, bool unsatisfiable) {
  const auto& entities = ontology.entities(schema.name);
  auto slots = schema.constrainable();
  for (int attempt = 0;; ++attempt) {
    const Entity& e = entities[rng.below(entities.size())];
    rng.shuffle(slots.begin(), slots.end());
    int k = uniform_int(rng, config.min_constraints, config.max_constraints);
    k = std::clamp(k, 1, static_cast<int>(slots.size()));

    DomainGoal g;
    g.domain = schema.name;
    for (int i = 0; i < k; ++i) g.constraints[slots[i]] = e.at(slots[i]);

    if (unsatisfiable) {
      Constraints broken = g.constraints;
      bool ok = break_constraints(ontology, schema, broken, rng);
      // Widen the constraint set once before trying another entity.
      for (int extra = k; !ok && extra < static_cast<int>(slots.size()); ++extra) {
        g.constraints[slots[extra]] = e.at(slots[extra]);
        broken = g.constraints;
        ok = break_constraints(ontology, schema, broken, rng);
      }
      if (!ok) {
        if (attempt > 1000) throw ConfigError("cannot build an unsatisfiable goal for " + schema.name);
        continue;
      }
      g.alternative = g.constraints;
      g.constraints = std::move(broken);
    }

    auto req = schema.requestable;
    rng.shuffle(req.begin(), req.end());
    int r = std::clamp(uniform_int(rng, config.min_requests, config.max_requests), 0,
                       static_cast<int>(req.size()));
    g.requests.assign(req.begin(), req.begin() + r);
    std::sort(g.requests.begin(), g.requests.end());

    if (schema.bookable && rng.bernoulli(config.booking_probability)) {
      for (const auto& slot : schema.booking_slots) {
        if (slot == "people")
          g.booking[slot] = std::to_string(uniform_int(rng, 1, 8));
        else if (slot == "day")
          g.booking[slot] = kDays[rng.below(kDays.size())];
        else
          g.booking[slot] = "any";
      }
    }
    return g;
  }
}

}  // namespace

UserGoal sample_goal(const Ontology& ontology, Rng& rng, const GoalConfig& config) {
  if (ontology.empty()) throw ConfigError("cannot sample a goal from an empty ontology");
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(config.multi_domain_probability) || !in_unit(config.unsatisfiable_probability) ||
      !in_unit(config.booking_probability))
    throw ConfigError("goal probabilities must lie in [0, 1]");
  if (config.min_constraints < 1 || config.max_constraints < config.min_constraints ||
      config.min_requests < 0 || config.max_requests < config.min_requests)
    throw ConfigError("invalid goal size range");

  const auto& schemas = ontology.domains();
  std::vector<std::size_t> order(schemas.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  const bool multi = schemas.size() > 1 && rng.bernoulli(config.multi_domain_probability);
  const std::size_t n = multi ? 2 : 1;
  const bool unsat = rng.bernoulli(config.unsatisfiable_probability);
  const std::size_t unsat_index = unsat ? rng.below(n) : n;

  UserGoal goal;
  for (std::size_t i = 0; i < n; ++i)
    goal.domains.push_back(
        sample_domain_goal(ontology, schemas[order[i]], rng, config, i == unsat_index));
  return goal;
}

void validate_goal(const UserGoal& goal, const Ontology& ontology) {
  if (goal.domains.empty()) throw ConfigError("goal has no domains");
  for (const auto& g : goal.domains) {
    const DomainSchema& d = ontology.domain(g.domain);
    for (const auto& [slot, value] : g.constraints)
      if (!d.is_informable(slot))
        throw ConfigError("goal constraint on non-informable slot " + g.domain + "." + slot);
    if (g.alternative)
      for (const auto& [slot, value] : *g.alternative)
        if (!d.is_informable(slot))
          throw ConfigError("goal constraint on non-informable slot " + g.domain + "." + slot);
    for (const auto& r : g.requests)
      if (!d.is_requestable(r)) throw ConfigError("goal requests non-requestable " + g.domain + "." + r);
    for (const auto& [slot, value] : g.booking)
      if (!d.is_booking_slot(slot)) throw ConfigError("unknown booking slot " + g.domain + "." + slot);
  }
}

namespace {

std::string describe_constraints(const Constraints& c) {
  std::vector<std::string> parts;
  for (const auto& [slot, value] : c) {
    if (slot == "area") parts.push_back("in the " + value);
    else if (slot == "food") parts.push_back("serving " + value + " food");
    else if (slot == "pricerange") parts.push_back("in the " + value + " price range");
    else if (slot == "stars") parts.push_back("rated " + value);
    else if (slot == "type") parts.push_back("of type " + value);
    else if (slot == "entrance") parts.push_back("with " + value + " entrance");
    else parts.push_back("with " + slot + " " + value);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string render_goal_text(const UserGoal& goal) {
  std::ostringstream out;
  for (std::size_t i = 0; i < goal.domains.size(); ++i) {
    const DomainGoal& g = goal.domains[i];
    out << (i == 0 ? "You are looking for a " : "You are also looking for a ") << g.domain << " "
        << describe_constraints(g.constraints) << ". ";
    if (g.alternative)
      out << "If there is no such " << g.domain << ", look for one "
          << describe_constraints(*g.alternative) << " instead. ";
    if (!g.requests.empty()) {
      out << "Once you find one, ask for its ";
      for (std::size_t r = 0; r < g.requests.size(); ++r) {
        if (r > 0) out << (r + 1 == g.requests.size() ? " and " : ", ");
        out << g.requests[r];
      }
      out << ". ";
    }
    if (g.needs_booking()) {
      out << "Book it";
      if (g.booking.count("people")) out << " for " << g.booking.at("people") << " people";
      if (g.booking.count("day")) out << " on " << g.booking.at("day");
      out << " and make sure you get a reference number. ";
    }
  }
  out << "Please use these exact terms when talking to the system.";
  return out.str();
}

void to_json(Json& j, const DomainGoal& g) {
  j = Json{{"domain", g.domain}, {"constraints", g.constraints}, {"requests", g.requests},
           {"booking", g.booking}};
  if (g.alternative) j["alternative"] = *g.alternative;
}

void from_json(const Json& j, DomainGoal& g) {
  g.domain = j.at("domain").get<std::string>();
  g.constraints = j.at("constraints").get<Constraints>();
  g.alternative.reset();
  if (j.contains("alternative") && !j["alternative"].is_null())
    g.alternative = j["alternative"].get<Constraints>();
  g.requests = j.value("requests", std::vector<std::string>{});
  g.booking = j.value("booking", std::map<std::string, std::string>{});
}

void to_json(Json& j, const UserGoal& g) { j = Json{{"domains", g.domains}}; }

void from_json(const Json& j, UserGoal& g) {
  g.domains = j.at("domains").get<std::vector<DomainGoal>>();
}

}  // namespace affectod
