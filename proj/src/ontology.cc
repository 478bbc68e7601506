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

#include "affectod/ontology.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "affectod/errors.h"
#include "affectod/rng.h"

namespace affectod {

std::vector<std::string> DomainSchema::constrainable() const {
  std::vector<std::string> out;
  for (const auto& [slot, values] : informable)
    if (slot != kNameSlot) out.push_back(slot);
  return out;
}

bool DomainSchema::is_informable(std::string_view slot) const {
  return informable.find(std::string(slot)) != informable.end();
}

bool DomainSchema::is_requestable(std::string_view slot) const {
  return std::find(requestable.begin(), requestable.end(), slot) != requestable.end();
}

bool DomainSchema::is_booking_slot(std::string_view slot) const {
  return std::find(booking_slots.begin(), booking_slots.end(), slot) != booking_slots.end();
}

Ontology::Ontology(std::vector<DomainSchema> domains,
                   std::map<std::string, std::vector<Entity>> db)
    : domains_(std::move(domains)) {
  if (domains_.empty()) throw ConfigError("ontology has no domains");
  std::set<std::string> names;
  for (const auto& d : domains_) {
    if (d.name.empty() || d.name == kGeneralDomain)
      throw ConfigError("invalid domain name '" + d.name + "'");
    if (!names.insert(d.name).second) throw ConfigError("duplicate domain '" + d.name + "'");
    std::set<std::string> slots;
    for (const auto& [slot, values] : d.informable) slots.insert(slot);
    for (const auto& s : d.requestable)
      if (!slots.insert(s).second) throw ConfigError("duplicate slot '" + s + "' in " + d.name);
    for (const auto& s : d.booking_slots)
      if (!slots.insert(s).second) throw ConfigError("duplicate slot '" + s + "' in " + d.name);
    if (!d.is_informable(kNameSlot))
      throw ConfigError("domain '" + d.name + "' lacks an informable name slot");

    auto it = db.find(d.name);
    if (it == db.end() || it->second.empty())
      throw ConfigError("domain '" + d.name + "' has no entities");
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const Entity& e = it->second[i];
      for (const auto& [slot, values] : d.informable) {
        auto v = e.find(slot);
        if (v == e.end())
          throw ConfigError(d.name + " entity " + std::to_string(i) + " lacks slot '" + slot + "'");
        if (std::find(values.begin(), values.end(), v->second) == values.end())
          throw ConfigError(d.name + " entity " + std::to_string(i) + " value '" + v->second +
                            "' is not a candidate of slot '" + slot + "'");
      }
      for (const auto& slot : d.requestable)
        if (!e.count(slot))
          throw ConfigError(d.name + " entity " + std::to_string(i) + " lacks slot '" + slot + "'");
    }
    db_.emplace(d.name, std::move(it->second));
  }
  build_known_values();
}

void Ontology::build_known_values() {
  std::map<std::string, std::set<std::string>> by_value;
  for (const auto& d : domains_) {
    for (const auto& [slot, values] : d.informable)
      for (const auto& v : values) by_value[v].insert(slot);
    for (const auto& e : db_.at(d.name))
      for (const auto& slot : d.requestable) by_value[e.at(slot)].insert(slot);
  }
  known_values_.clear();
  for (auto& [v, slots] : by_value) known_values_.push_back({v, std::move(slots)});
  std::stable_sort(known_values_.begin(), known_values_.end(),
                   [](const KnownValue& a, const KnownValue& b) {
                     return a.value.size() > b.value.size();
                   });
}

const DomainSchema* Ontology::find_domain(std::string_view name) const {
  for (const auto& d : domains_)
    if (d.name == name) return &d;
  return nullptr;
}

const DomainSchema& Ontology::domain(std::string_view name) const {
  const DomainSchema* d = find_domain(name);
  if (!d) throw ConfigError("unknown domain '" + std::string(name) + "'");
  return *d;
}

std::size_t Ontology::domain_index(std::string_view name) const {
  for (std::size_t i = 0; i < domains_.size(); ++i)
    if (domains_[i].name == name) return i;
  return npos;
}

const std::vector<Entity>& Ontology::entities(std::string_view domain) const {
  auto it = db_.find(domain);
  if (it == db_.end()) throw ConfigError("unknown domain '" + std::string(domain) + "'");
  return it->second;
}

bool Ontology::satisfies(const Entity& entity, const Constraints& constraints) {
  for (const auto& [slot, value] : constraints) {
    if (value == kDontCare) continue;
    auto it = entity.find(slot);
    if (it == entity.end() || it->second != value) return false;
  }
  return true;
}

std::vector<std::size_t> Ontology::matches(std::string_view domain,
                                           const Constraints& constraints) const {
  std::vector<std::size_t> out;
  const auto& es = entities(domain);
  for (std::size_t i = 0; i < es.size(); ++i)
    if (satisfies(es[i], constraints)) out.push_back(i);
  return out;
}

std::size_t Ontology::count_matches(std::string_view domain, const Constraints& constraints) const {
  std::size_t n = 0;
  for (const auto& e : entities(domain))
    if (satisfies(e, constraints)) ++n;
  return n;
}

std::size_t Ontology::find_entity(std::string_view domain, std::string_view name) const {
  const auto& es = entities(domain);
  for (std::size_t i = 0; i < es.size(); ++i)
    if (es[i].at(kNameSlot) == name) return i;
  return npos;
}

std::string Ontology::booking_reference(std::string_view domain, std::size_t entity) const {
  const std::string& name = entities(domain).at(entity).at(kNameSlot);
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : std::string(domain) + "/" + name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  static constexpr char kAlphabet[] = "ABCDEFGHJKLMNPQRSTUVWXYZ23456789";
  std::string ref;
  for (int i = 0; i < 8; ++i) {
    ref += kAlphabet[h % 32];
    h /= 32;
  }
  return ref;
}

std::size_t Ontology::entity_for_reference(std::string_view domain, std::string_view ref) const {
  const auto& es = entities(domain);
  for (std::size_t i = 0; i < es.size(); ++i)
    if (booking_reference(domain, i) == ref) return i;
  return npos;
}

bool Ontology::accepts(const SemanticAct& act, std::string* why) const {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (act.domain == kGeneralDomain) {
    if (act.slot) return fail("general act with slot '" + *act.slot + "'");
    return true;
  }
  const DomainSchema* d = find_domain(act.domain);
  if (!d) return fail("unknown domain '" + act.domain + "'");
  if (act.slot && !(act.intent == Intent::kBook && *act.slot == "ref")) {
    const std::string& s = *act.slot;
    if (!d->is_informable(s) && !d->is_requestable(s) && !d->is_booking_slot(s))
      return fail("unknown slot '" + s + "' in domain '" + act.domain + "'");
  }
  return true;
}

// ---------------------------------------------------------------------------
// Desk ontology

namespace {

const std::vector<std::string> kAreas = {"centre", "north", "south", "east", "west"};
const std::vector<std::string> kPrices = {"cheap", "moderate", "expensive"};
const std::vector<std::string> kFoods = {"italian", "chinese", "indian", "british", "french", "thai"};
const std::vector<std::string> kStars = {"two star", "three star", "four star"};
const std::vector<std::string> kTypes = {"museum", "park", "theatre", "college", "gallery", "cinema"};
const std::vector<std::string> kEntrance = {"free", "paid"};

const std::vector<std::string> kStreets = {"regent", "mill", "station", "hills", "bridge", "castle",
                                           "trinity", "market", "hope", "chesterton", "newmarket",
                                           "lensfield", "tenison", "hobson", "panton", "barton"};
const std::vector<std::string> kStreetKinds = {"road", "street", "lane", "way"};

std::string make_phone(Rng& rng, std::set<std::string>& used) {
  for (;;) {
    std::string p = "01223";
    for (int i = 0; i < 6; ++i) p += static_cast<char>('0' + rng.below(10));
    if (used.insert(p).second) return p;
  }
}

std::string make_address(Rng& rng) {
  return std::to_string(1 + rng.below(98)) + " " + kStreets[rng.below(kStreets.size())] + " " +
         kStreetKinds[rng.below(kStreetKinds.size())];
}

std::string make_postcode(Rng& rng) {
  static constexpr char kLetters[] = "abdefghjlnpqrstuwxyz";
  std::string pc = "cb" + std::to_string(1 + rng.below(5)) + " " + std::to_string(rng.below(10));
  pc += kLetters[rng.below(20)];
  pc += kLetters[rng.below(20)];
  return pc;
}

std::vector<std::string> make_names(const std::vector<std::string>& first,
                                    const std::vector<std::string>& second, std::size_t n,
                                    const std::string& prefix, Rng& rng) {
  std::vector<std::string> all;
  for (const auto& a : first)
    for (const auto& b : second) all.push_back(prefix + a + " " + b);
  rng.shuffle(all.begin(), all.end());
  all.resize(n);
  return all;
}

template <typename Fill>
std::vector<Entity> make_entities(const std::vector<std::string>& names, Rng& rng,
                                  std::set<std::string>& phones, Fill fill) {
  std::vector<Entity> out;
  for (const auto& name : names) {
    Entity e;
    e[kNameSlot] = name;
    fill(e);
    e["phone"] = make_phone(rng, phones);
    e["address"] = make_address(rng);
    e["postcode"] = make_postcode(rng);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

Ontology desk_ontology() {
  Rng rng(20240917);
  std::set<std::string> phones;
  auto pick = [&](const std::vector<std::string>& vs) { return vs[rng.below(vs.size())]; };

  auto restaurant_names =
      make_names({"golden", "silver", "copper", "blue", "royal", "little", "old", "lucky", "crooked"},
                 {"kettle", "lantern", "spoon", "fork", "anchor", "crown", "lion"}, 45, "the ", rng);
  auto hotel_names = make_names({"alder", "birch", "cedar", "elm", "hazel", "maple", "rowan",
                                 "willow", "aspen", "laurel", "juniper", "holly"},
                                {"house", "lodge", "inn"}, 36, "", rng);
  auto attraction_names = make_names({"kelsey", "whipple", "fenwick", "harlow", "sedley",
                                      "ashdown", "marlowe", "thorne", "wickham", "pembury", "elwood"},
                                     {"pavilion", "rooms", "arcade"}, 33, "the ", rng);

  auto restaurants = make_entities(restaurant_names, rng, phones, [&](Entity& e) {
    e["area"] = pick(kAreas);
    e["food"] = pick(kFoods);
    e["pricerange"] = pick(kPrices);
  });
  auto hotels = make_entities(hotel_names, rng, phones, [&](Entity& e) {
    e["area"] = pick(kAreas);
    e["pricerange"] = pick(kPrices);
    e["stars"] = pick(kStars);
  });
  auto attractions = make_entities(attraction_names, rng, phones, [&](Entity& e) {
    e["area"] = pick(kAreas);
    e["type"] = pick(kTypes);
    e["entrance"] = pick(kEntrance);
  });

  auto names_of = [](const std::vector<Entity>& es) {
    std::vector<std::string> out;
    for (const auto& e : es) out.push_back(e.at(kNameSlot));
    return out;
  };

  std::vector<DomainSchema> domains(3);
  domains[0].name = "restaurant";
  domains[0].informable = {{"area", kAreas}, {"food", kFoods}, {"pricerange", kPrices},
                           {kNameSlot, names_of(restaurants)}};
  domains[0].requestable = {"phone", "address", "postcode"};
  domains[0].booking_slots = {"people", "day"};
  domains[0].bookable = true;

  domains[1].name = "hotel";
  domains[1].informable = {{"area", kAreas}, {"pricerange", kPrices}, {"stars", kStars},
                           {kNameSlot, names_of(hotels)}};
  domains[1].requestable = {"phone", "address", "postcode"};
  domains[1].booking_slots = {"people", "day"};
  domains[1].bookable = true;

  domains[2].name = "attraction";
  domains[2].informable = {{"area", kAreas}, {"type", kTypes}, {"entrance", kEntrance},
                           {kNameSlot, names_of(attractions)}};
  domains[2].requestable = {"phone", "address", "postcode"};
  domains[2].bookable = false;

  std::map<std::string, std::vector<Entity>> db;
  db["restaurant"] = std::move(restaurants);
  db["hotel"] = std::move(hotels);
  db["attraction"] = std::move(attractions);
  return Ontology(std::move(domains), std::move(db));
}

Json ontology_to_json(const Ontology& ontology) {
  Json j;
  j["domains"] = Json::array();
  for (const auto& d : ontology.domains()) {
    Json dj;
    dj["name"] = d.name;
    dj["informable"] = d.informable;
    dj["requestable"] = d.requestable;
    dj["booking"] = d.booking_slots;
    dj["bookable"] = d.bookable;
    j["domains"].push_back(dj);
    j["database"][d.name] = ontology.entities(d.name);
  }
  return j;
}

Ontology ontology_from_json(const Json& j) {
  try {
    std::vector<DomainSchema> domains;
    for (const auto& dj : j.at("domains")) {
      DomainSchema d;
      d.name = dj.at("name").get<std::string>();
      d.informable = dj.at("informable").get<std::map<std::string, std::vector<std::string>>>();
      d.requestable = dj.value("requestable", std::vector<std::string>{});
      d.booking_slots = dj.value("booking", std::vector<std::string>{});
      d.bookable = dj.value("bookable", false);
      domains.push_back(std::move(d));
    }
    auto db = j.at("database").get<std::map<std::string, std::vector<Entity>>>();
    return Ontology(std::move(domains), std::move(db));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed ontology json: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return j;
}

Ontology load_ontology(const std::string& path) { return ontology_from_json(read_json_file(path)); }

}  // namespace affectod
