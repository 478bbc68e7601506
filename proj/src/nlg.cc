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

#include "affectod/nlg.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "affectod/errors.h"

namespace affectod {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Offsets of `needle` in `hay` (both lower case) with word boundaries.
std::vector<std::size_t> find_bounded(const std::string& hay, const std::string& needle) {
  std::vector<std::size_t> out;
  if (needle.empty()) return out;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !word_char(hay[pos - 1]) || !word_char(needle.front());
    const std::size_t end = pos + needle.size();
    const bool right = end == hay.size() || !word_char(hay[end]) || !word_char(needle.back());
    if (left && right) out.push_back(pos);
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string key_of(Intent intent, std::string_view domain, std::string_view slot) {
  return std::string(name_of(intent)) + "|" + std::string(domain) + "|" + std::string(slot);
}

}  // namespace

TemplateBank TemplateBank::defaults() {
  TemplateBank b;
  auto add = [&](Intent i, const char* domain, const char* slot, std::vector<std::string> ts) {
    b.templates[key_of(i, domain, slot)] = std::move(ts);
  };
  add(Intent::kInform, "*", "area", {"It is in the {value} area.", "It is located in the {value}."});
  add(Intent::kInform, "*", "food", {"They serve {value} food.", "It serves {value} cuisine."});
  add(Intent::kInform, "*", "pricerange", {"It is in the {value} price range."});
  add(Intent::kInform, "*", "stars", {"It is rated {value}."});
  add(Intent::kInform, "*", "type", {"It is a {value}."});
  add(Intent::kInform, "*", "entrance", {"The entrance is {value}."});
  add(Intent::kInform, "*", "name", {"It is called {value}."});
  add(Intent::kInform, "*", "phone", {"The phone number is {value}.", "You can reach them on {value}."});
  add(Intent::kInform, "*", "address", {"The address is {value}.", "They are located at {value}."});
  add(Intent::kInform, "*", "postcode", {"The postcode is {value}."});
  add(Intent::kInform, "*", "*", {"The {slot} is {value}."});
  add(Intent::kRecommend, "*", "name", {"How about {value}?", "I would recommend {value}."});
  add(Intent::kRecommend, "*", "*", {"I would suggest {value} for the {slot}."});
  add(Intent::kRequest, "*", "area", {"Which area would you like?"});
  add(Intent::kRequest, "*", "food", {"What kind of food would you like?"});
  add(Intent::kRequest, "*", "pricerange", {"What price range are you looking for?"});
  add(Intent::kRequest, "*", "stars", {"How many stars should the {domain} have?"});
  add(Intent::kRequest, "*", "type", {"What type of attraction are you interested in?"});
  add(Intent::kRequest, "*", "*", {"What {slot} would you like?"});
  add(Intent::kConfirm, "*", "*", {"Just to confirm, you want {value}?"});
  add(Intent::kBook, "*", "ref", {"I have booked it, your reference number is {value}.",
                                  "Your booking is confirmed, the reference number is {value}."});
  add(Intent::kBook, "*", "", {"Shall I go ahead and book it?"});
  add(Intent::kNoOffer, "*", "", {"Unfortunately there is no {domain} matching your request.",
                                  "I could not find any {domain} like that."});
  add(Intent::kReqMore, "*", "", {"Is there anything else I can help you with?"});
  add(Intent::kBye, "*", "", {"Goodbye, have a nice day."});
  add(Intent::kGreet, "*", "", {"Hello, how can I help you?"});

  b.phrases[index_of(Conduct::kCompassionate)] = {"I understand how stressful this must be.",
                                                  "That sounds difficult, let me see what I can do."};
  b.phrases[index_of(Conduct::kApologetic)] = {"I'm sorry about that.",
                                               "My apologies for the confusion."};
  b.phrases[index_of(Conduct::kEnthusiastic)] = {"I'd be happy to help!", "Certainly, with pleasure!"};
  b.phrases[index_of(Conduct::kAppreciative)] = {"Thank you for your patience.",
                                                 "Glad that works for you."};
  return b;
}

const std::vector<std::string>* TemplateBank::lookup(const SemanticAct& act) const {
  const std::string slot = act.slot.value_or("");
  for (const auto& key : {key_of(act.intent, act.domain, slot), key_of(act.intent, "*", slot),
                          key_of(act.intent, act.domain, slot.empty() ? "" : "*"),
                          key_of(act.intent, "*", slot.empty() ? "" : "*")}) {
    auto it = templates.find(key);
    if (it != templates.end() && !it->second.empty()) return &it->second;
  }
  return nullptr;
}

Json template_bank_to_json(const TemplateBank& bank) {
  Json j;
  j["templates"] = bank.templates;
  for (Conduct c : kAllConducts) j["conduct_phrases"][std::string(name_of(c))] = bank.phrases_of(c);
  return j;
}

TemplateBank template_bank_from_json(const Json& j) {
  TemplateBank b;
  try {
    b.templates = j.at("templates").get<std::map<std::string, std::vector<std::string>>>();
    const Json& p = j.at("conduct_phrases");
    for (auto it = p.begin(); it != p.end(); ++it)
      b.phrases[index_of(parse_conduct(it.key()))] = it.value().get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed template bank: ") + e.what());
  }
  if (!b.phrases_of(Conduct::kNeutral).empty())
    throw ConfigError("neutral conduct must not have affective phrases");
  return b;
}

bool conduct_eligible(Conduct conduct, std::span<const SemanticAct> acts) {
  switch (conduct) {
    case Conduct::kNeutral:
      return true;
    case Conduct::kAppreciative:
    case Conduct::kEnthusiastic:
      return std::none_of(acts.begin(), acts.end(),
                          [](const SemanticAct& a) { return a.intent == Intent::kNoOffer; });
    case Conduct::kApologetic:
    case Conduct::kCompassionate:
      return acts.empty() || !std::all_of(acts.begin(), acts.end(), [](const SemanticAct& a) {
        return a.intent == Intent::kBook && a.value.has_value();
      });
  }
  return false;
}

std::string realize(std::span<const SemanticAct> acts, Conduct conduct, const TemplateBank& bank,
                    Rng& rng) {
  std::vector<std::string> parts;
  for (const auto& act : acts) {
    const auto* ts = bank.lookup(act);
    if (!ts) throw RealizationError("no template for " + to_string(act));
    std::string s = (*ts)[rng.below(ts->size())];
    replace_all(s, "{value}", act.value.value_or(""));
    replace_all(s, "{slot}", act.slot.value_or(""));
    replace_all(s, "{domain}", act.domain);
    parts.push_back(std::move(s));
  }
  std::string out;
  if (conduct != Conduct::kNeutral && conduct_eligible(conduct, acts)) {
    const auto& ps = bank.phrases_of(conduct);
    if (!ps.empty()) out = ps[rng.below(ps.size())];
  }
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

Conduct detect_conduct(std::string_view utterance, const TemplateBank& bank) {
  const std::string text = lower(utterance);
  for (Conduct c : kAllConducts)
    for (const auto& p : bank.phrases_of(c))
      if (text.find(lower(p)) != std::string::npos) return c;
  return Conduct::kNeutral;
}

std::vector<ValueSpan> unlicensed_values(std::string_view text, std::span<const SemanticAct> acts,
                                         const Ontology& ontology, bool informative_only) {
  std::string masked = lower(text);
  auto mask = [&](std::size_t pos, std::size_t len) {
    for (std::size_t i = pos; i < pos + len; ++i) masked[i] = '#';
  };

  // (value, slot) pairs licensed by the acts.
  std::vector<std::pair<std::string, std::string>> licensed;
  for (const auto& a : acts) {
    if (!a.value || !a.slot) continue;
    if (informative_only && !a.licenses_value()) continue;
    licensed.emplace_back(lower(*a.value), *a.slot);
  }
  std::sort(licensed.begin(), licensed.end(),
            [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });
  for (const auto& [v, slot] : licensed)
    for (std::size_t pos : find_bounded(masked, v)) mask(pos, v.size());

  std::vector<ValueSpan> out;
  for (const KnownValue& kv : ontology.known_values()) {
    const std::string v = lower(kv.value);
    for (std::size_t pos : find_bounded(masked, v)) {
      bool ok = false;
      for (const auto& [lv, slot] : licensed)
        if (lv == v && kv.slots.count(slot)) ok = true;
      if (!ok) out.push_back({kv.value, pos});
      mask(pos, v.size());
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ValueSpan& a, const ValueSpan& b) { return a.offset < b.offset; });
  return out;
}

SerReport slot_error_rate(std::span<const RealisedTurn> turns, const Ontology& ontology) {
  SerReport r;
  std::size_t bad = 0;
  for (const auto& [utterance, acts] : turns) {
    SlotErrors e;
    const std::string text = lower(utterance);
    for (const auto& a : acts)
      if (a.value && find_bounded(text, lower(*a.value)).empty()) e.missing.push_back(*a.value);
    e.unlicensed = unlicensed_values(utterance, acts, ontology, /*informative_only=*/false);
    if (e.erroneous()) ++bad;
    r.per_utterance.push_back(std::move(e));
  }
  r.rate = turns.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(turns.size());
  return r;
}

Json ser_report_to_json(const SerReport& report) {
  Json j;
  j["metric"] = "slot_error_rate";
  j["denominator"] = "utterances";
  j["rate"] = report.rate;
  j["utterances"] = report.per_utterance.size();
  j["errors"] = Json::array();
  for (std::size_t i = 0; i < report.per_utterance.size(); ++i) {
    const auto& e = report.per_utterance[i];
    if (!e.erroneous()) continue;
    Json ej{{"index", i}, {"missing", e.missing}, {"unlicensed", Json::array()}};
    for (const auto& s : e.unlicensed) ej["unlicensed"].push_back({{"value", s.value}, {"offset", s.offset}});
    j["errors"].push_back(ej);
  }
  return j;
}

std::string ser_report_table(const SerReport& report) {
  std::ostringstream out;
  std::size_t bad = 0;
  for (const auto& e : report.per_utterance) bad += e.erroneous() ? 1 : 0;
  out << "utterances  erroneous  SER\n";
  out << report.per_utterance.size() << "  " << bad << "  " << report.rate << "\n";
  for (std::size_t i = 0; i < report.per_utterance.size(); ++i) {
    const auto& e = report.per_utterance[i];
    if (!e.erroneous()) continue;
    out << "  #" << i << ":";
    for (const auto& m : e.missing) out << " missing '" << m << "'";
    for (const auto& u : e.unlicensed) out << " unlicensed '" << u.value << "'";
    out << "\n";
  }
  return out.str();
}

}  // namespace affectod
