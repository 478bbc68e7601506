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

#ifndef AFFECTOD_ACT_H_
#define AFFECTOD_ACT_H_

#include <optional>
#include <string>
#include <vector>

#include "affectod/labels.h"
#include "json.hpp"

namespace affectod {

using Json = nlohmann::json;

// Domain name used by acts that are not tied to a task domain (reqmore,
// bye, greet).
inline constexpr const char* kGeneralDomain = "general";

// (intent, domain, slot, value). Shared by the policy, the generator, the
// simulated user and the metrics.
struct SemanticAct {
  Intent intent = Intent::kInform;
  std::string domain;
  std::optional<std::string> slot;
  std::optional<std::string> value;

  static SemanticAct inform(std::string domain, std::string slot, std::string value) {
    return {Intent::kInform, std::move(domain), std::move(slot), std::move(value)};
  }
  static SemanticAct request(std::string domain, std::string slot) {
    return {Intent::kRequest, std::move(domain), std::move(slot), std::nullopt};
  }
  static SemanticAct recommend(std::string domain, std::string slot, std::string value) {
    return {Intent::kRecommend, std::move(domain), std::move(slot), std::move(value)};
  }
  static SemanticAct confirm(std::string domain, std::string slot, std::string value) {
    return {Intent::kConfirm, std::move(domain), std::move(slot), std::move(value)};
  }
  static SemanticAct no_offer(std::string domain) {
    return {Intent::kNoOffer, std::move(domain), std::nullopt, std::nullopt};
  }
  static SemanticAct book(std::string domain) {
    return {Intent::kBook, std::move(domain), std::nullopt, std::nullopt};
  }
  static SemanticAct booked(std::string domain, std::string reference) {
    return {Intent::kBook, std::move(domain), std::string("ref"), std::move(reference)};
  }
  static SemanticAct bye() { return {Intent::kBye, kGeneralDomain, std::nullopt, std::nullopt}; }
  static SemanticAct greet() { return {Intent::kGreet, kGeneralDomain, std::nullopt, std::nullopt}; }
  static SemanticAct reqmore() {
    return {Intent::kReqMore, kGeneralDomain, std::nullopt, std::nullopt};
  }

  // True for intents whose value is allowed to surface in a system utterance.
  bool licenses_value() const {
    return value.has_value() && (intent == Intent::kInform || intent == Intent::kRecommend ||
                                 intent == Intent::kConfirm);
  }

  friend bool operator==(const SemanticAct&, const SemanticAct&) = default;
  friend auto operator<=>(const SemanticAct&, const SemanticAct&) = default;
};

// Checks the slot/value shape required by the intent:
// inform/recommend/confirm carry slot and value, request carries a slot and
// no value, nooffer/bye/greet/reqmore carry neither, book carries either
// nothing or the pair ("ref", reference).
bool has_valid_shape(const SemanticAct& act, std::string* why = nullptr);

std::string to_string(const SemanticAct& act);

void to_json(Json& j, const SemanticAct& act);
void from_json(const Json& j, SemanticAct& act);

}  // namespace affectod

#endif  // AFFECTOD_ACT_H_
