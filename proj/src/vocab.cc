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

#include "affectod/vocab.h"

#include <algorithm>
#include <array>

namespace affectod {
namespace {

Token stop_token() {
  Token t;
  t.kind = Token::Kind::kStop;
  return t;
}

}  // namespace

std::string to_string(const Token& t) {
  switch (t.kind) {
    case Token::Kind::kStop: return "STOP";
    case Token::Kind::kConduct: return "conduct:" + std::string(name_of(t.conduct));
    case Token::Kind::kAct: break;
  }
  std::string s = std::string(name_of(t.intent)) + "(" + t.domain;
  if (t.slot) s += "," + *t.slot;
  return s + ")";
}

Vocabulary::Vocabulary(const Ontology& ontology) {
  auto act = [&](Intent i, const std::string& d, std::optional<std::string> slot) {
    Token t;
    t.intent = i;
    t.domain = d;
    t.slot = std::move(slot);
    tokens_.push_back(std::move(t));
  };
  for (const auto& d : ontology.domains()) {
    const auto constrainable = d.constrainable();
    for (const auto& s : constrainable) act(Intent::kInform, d.name, s);
    for (const auto& s : d.requestable) act(Intent::kInform, d.name, s);
    act(Intent::kRecommend, d.name, std::string(kNameSlot));
    for (const auto& s : constrainable) act(Intent::kRequest, d.name, s);
    for (const auto& s : constrainable) act(Intent::kConfirm, d.name, s);
    if (d.bookable) act(Intent::kBook, d.name, std::nullopt);
    act(Intent::kNoOffer, d.name, std::nullopt);
  }
  act(Intent::kReqMore, kGeneralDomain, std::nullopt);
  act(Intent::kBye, kGeneralDomain, std::nullopt);
  act(Intent::kGreet, kGeneralDomain, std::nullopt);
  stop_ = tokens_.size();
  tokens_.push_back(stop_token());
  for (Conduct c : kAllConducts) {
    Token t;
    t.kind = Token::Kind::kConduct;
    t.conduct = c;
    tokens_.push_back(t);
  }
}

Vocabulary Vocabulary::toy(std::size_t num_acts) {
  Vocabulary v;
  for (std::size_t i = 0; i < num_acts; ++i) {
    Token t;
    t.intent = Intent::kInform;
    t.domain = "toy";
    t.slot = "s" + std::to_string(i);
    v.tokens_.push_back(t);
  }
  v.stop_ = num_acts;
  v.tokens_.push_back(stop_token());
  for (Conduct c : kAllConducts) {
    Token t;
    t.kind = Token::Kind::kConduct;
    t.conduct = c;
    v.tokens_.push_back(t);
  }
  return v;
}

std::optional<std::size_t> Vocabulary::find(Intent intent, std::string_view domain,
                                            std::optional<std::string_view> slot) const {
  for (std::size_t i = 0; i < stop_; ++i) {
    const Token& t = tokens_[i];
    if (t.intent != intent || t.domain != domain) continue;
    if (t.slot.has_value() != slot.has_value()) continue;
    if (t.slot && *t.slot != *slot) continue;
    return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Vocabulary::find(const SemanticAct& act) const {
  if (act.intent == Intent::kBook) return find(Intent::kBook, act.domain, std::nullopt);
  if (act.intent == Intent::kRecommend || act.intent == Intent::kInform ||
      act.intent == Intent::kRequest || act.intent == Intent::kConfirm) {
    if (!act.slot) return std::nullopt;
    return find(act.intent, act.domain, std::string_view(*act.slot));
  }
  return find(act.intent, act.domain, std::nullopt);
}

namespace {

constexpr std::array<Intent, 6> kDomainIntents = {Intent::kInform,  Intent::kRecommend,
                                                   Intent::kRequest, Intent::kConfirm,
                                                   Intent::kBook,    Intent::kNoOffer};
constexpr std::array<Intent, 3> kGeneralIntents = {Intent::kReqMore, Intent::kBye, Intent::kGreet};

bool said(const DialogueState& state, std::string_view domain, Intent intent) {
  return std::any_of(state.last_system_acts.begin(), state.last_system_acts.end(),
                     [&](const SemanticAct& a) { return a.domain == domain && a.intent == intent; });
}

}  // namespace

std::size_t feature_dim(const Ontology& ontology) {
  std::size_t n = 0;
  for (const auto& d : ontology.domains())
    n += d.constrainable().size() + d.requestable.size() + kNumBuckets + 5 + kDomainIntents.size();
  return n + kGeneralIntents.size() + 2 + kNumEmotions;
}

std::vector<double> featurize(const DialogueState& state, const Ontology& ontology,
                              bool emotion_in_state) {
  std::vector<double> x;
  x.reserve(feature_dim(ontology));
  const auto& domains = ontology.domains();
  for (std::size_t di = 0; di < domains.size(); ++di) {
    const DomainSchema& d = domains[di];
    const DomainState& ds = state.domains[di];
    for (const auto& s : d.constrainable()) x.push_back(ds.constraints.count(s) ? 1.0 : 0.0);
    for (const auto& s : d.requestable) x.push_back(ds.requested.count(s) ? 1.0 : 0.0);
    const bool constrained = !ds.constraints.empty();
    const auto bucket = static_cast<std::size_t>(bucket_of(ds.match_count));
    for (std::size_t b = 0; b < kNumBuckets; ++b)
      x.push_back(constrained && b == bucket ? 1.0 : 0.0);
    const bool valid_offer =
        ds.offered && Ontology::satisfies(ontology.entities(d.name)[*ds.offered], ds.constraints);
    x.push_back(ds.booking_requested ? 1.0 : 0.0);
    x.push_back(ds.booking_done ? 1.0 : 0.0);
    x.push_back(valid_offer ? 1.0 : 0.0);
    x.push_back(state.active_domain == d.name ? 1.0 : 0.0);
    x.push_back(ds.no_offer_given ? 1.0 : 0.0);
    for (Intent i : kDomainIntents) x.push_back(said(state, d.name, i) ? 1.0 : 0.0);
  }
  for (Intent i : kGeneralIntents) x.push_back(said(state, kGeneralDomain, i) ? 1.0 : 0.0);
  x.push_back(state.user_repeats >= 1 ? 1.0 : 0.0);
  x.push_back(state.user_repeats >= 2 ? 1.0 : 0.0);
  for (UserEmotion e : kAllEmotions)
    x.push_back(emotion_in_state && state.perceived_emotion == e ? 1.0 : 0.0);
  return x;
}

std::vector<SemanticAct> ground(std::span<const std::size_t> act_tokens, const Vocabulary& vocab,
                                const DialogueState& state, const Ontology& ontology) {
  std::vector<SemanticAct> out;
  for (std::size_t idx : act_tokens) {
    if (!vocab.is_act(idx)) continue;
    const Token& t = vocab.at(idx);
    if (t.domain == kGeneralDomain) {
      out.push_back({t.intent, t.domain, std::nullopt, std::nullopt});
      continue;
    }
    const DomainState& ds = state.at(ontology, t.domain);
    switch (t.intent) {
      case Intent::kInform:
      case Intent::kRecommend: {
        if (ds.constraints.empty()) break;
        auto e = selected_entity(state, ontology, t.domain);
        if (!e) break;
        const Entity& ent = ontology.entities(t.domain)[*e];
        auto it = ent.find(*t.slot);
        if (it == ent.end()) break;
        out.push_back({t.intent, t.domain, t.slot, it->second});
        break;
      }
      case Intent::kConfirm: {
        auto it = ds.constraints.find(*t.slot);
        if (it == ds.constraints.end()) break;
        out.push_back(SemanticAct::confirm(t.domain, *t.slot, it->second));
        break;
      }
      case Intent::kBook: {
        if (ds.constraints.empty() || !ds.booking_requested) break;
        auto e = selected_entity(state, ontology, t.domain);
        if (!e) break;
        out.push_back(SemanticAct::booked(t.domain, ontology.booking_reference(t.domain, *e)));
        break;
      }
      case Intent::kRequest:
        out.push_back(SemanticAct::request(t.domain, *t.slot));
        break;
      default:
        out.push_back({t.intent, t.domain, std::nullopt, std::nullopt});
        break;
    }
  }
  if (out.empty()) out.push_back(SemanticAct::reqmore());
  return out;
}

}  // namespace affectod
