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

#include "affectod/act.h"

namespace affectod {

bool has_valid_shape(const SemanticAct& act, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (act.domain.empty()) return fail("empty domain");
  switch (act.intent) {
    case Intent::kInform:
    case Intent::kRecommend:
    case Intent::kConfirm:
      if (!act.slot || !act.value) return fail("intent requires slot and value");
      return true;
    case Intent::kRequest:
      if (!act.slot) return fail("request requires a slot");
      if (act.value) return fail("request must not carry a value");
      return true;
    case Intent::kNoOffer:
    case Intent::kBye:
    case Intent::kGreet:
    case Intent::kReqMore:
      if (act.slot || act.value) return fail("intent carries neither slot nor value");
      return true;
    case Intent::kBook:
      if (!act.slot && !act.value) return true;
      if (act.slot && *act.slot == "ref" && act.value) return true;
      return fail("book carries nothing or a reference");
  }
  return fail("unknown intent");
}

std::string to_string(const SemanticAct& act) {
  std::string out(name_of(act.intent));
  out += "(" + act.domain;
  if (act.slot) out += ", " + *act.slot;
  if (act.value) out += "=" + *act.value;
  out += ")";
  return out;
}

void to_json(Json& j, const SemanticAct& act) {
  j = Json{{"intent", name_of(act.intent)}, {"domain", act.domain}};
  if (act.slot) j["slot"] = *act.slot;
  if (act.value) j["value"] = *act.value;
}

void from_json(const Json& j, SemanticAct& act) {
  act.intent = parse_intent(j.at("intent").get<std::string>());
  act.domain = j.at("domain").get<std::string>();
  act.slot.reset();
  act.value.reset();
  if (j.contains("slot") && !j["slot"].is_null()) act.slot = j["slot"].get<std::string>();
  if (j.contains("value") && !j["value"].is_null()) act.value = j["value"].get<std::string>();
}

}  // namespace affectod
