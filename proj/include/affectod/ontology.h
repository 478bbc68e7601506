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

#ifndef AFFECTOD_ONTOLOGY_H_
#define AFFECTOD_ONTOLOGY_H_

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "affectod/act.h"

namespace affectod {

// Constraint value meaning "any value is fine".
inline constexpr const char* kDontCare = "dontcare";
// Slot every entity carries and that identifies it in offers.
inline constexpr const char* kNameSlot = "name";

struct DomainSchema {
  std::string name;
  // slot -> candidate values. Ordered by slot name; feature layouts rely on it.
  std::map<std::string, std::vector<std::string>> informable;
  std::vector<std::string> requestable;
  std::vector<std::string> booking_slots;
  bool bookable = false;

  // Informable slots usable as goal constraints (everything but the name).
  std::vector<std::string> constrainable() const;
  bool is_informable(std::string_view slot) const;
  bool is_requestable(std::string_view slot) const;
  bool is_booking_slot(std::string_view slot) const;
};

using Entity = std::map<std::string, std::string>;
using Constraints = std::map<std::string, std::string>;

// A value string that may surface in a system utterance, together with every
// slot that can carry it.
struct KnownValue {
  std::string value;
  std::set<std::string> slots;
};

// Immutable domain/slot/value schema plus the entity database.
class Ontology {
 public:
  Ontology() = default;
  // Validates the invariants (unique names, database values inside candidate
  // lists, at least one entity per domain); throws ConfigError.
  Ontology(std::vector<DomainSchema> domains, std::map<std::string, std::vector<Entity>> db);

  const std::vector<DomainSchema>& domains() const { return domains_; }
  bool empty() const { return domains_.empty(); }
  const DomainSchema* find_domain(std::string_view name) const;
  const DomainSchema& domain(std::string_view name) const;
  std::size_t domain_index(std::string_view name) const;

  const std::vector<Entity>& entities(std::string_view domain) const;

  // Indices of entities that satisfy every constraint; "dontcare" matches all.
  std::vector<std::size_t> matches(std::string_view domain, const Constraints& constraints) const;
  std::size_t count_matches(std::string_view domain, const Constraints& constraints) const;
  static bool satisfies(const Entity& entity, const Constraints& constraints);

  // Entity index by name, or npos.
  std::size_t find_entity(std::string_view domain, std::string_view name) const;

  // Every informable candidate value and every database value of a
  // requestable slot; longest strings first.
  const std::vector<KnownValue>& known_values() const { return known_values_; }

  // Deterministic booking reference for an entity.
  std::string booking_reference(std::string_view domain, std::size_t entity) const;
  // Entity index whose booking reference equals `ref`, or npos.
  std::size_t entity_for_reference(std::string_view domain, std::string_view ref) const;

  // True when the act names a known domain (or "general") and a slot the
  // domain declares.
  bool accepts(const SemanticAct& act, std::string* why = nullptr) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void build_known_values();

  std::vector<DomainSchema> domains_;
  std::map<std::string, std::vector<Entity>, std::less<>> db_;
  std::vector<KnownValue> known_values_;
};

// Three-domain desk ontology (restaurant, hotel, attraction) with a
// procedurally generated but fixed database.
Ontology desk_ontology();

Json ontology_to_json(const Ontology& ontology);
Ontology ontology_from_json(const Json& j);
Ontology load_ontology(const std::string& path);

// Whole-file JSON; ConfigError when unreadable or malformed.
Json read_json_file(const std::string& path);

}  // namespace affectod

#endif  // AFFECTOD_ONTOLOGY_H_
