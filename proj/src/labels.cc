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

#include "affectod/labels.h"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace affectod {
namespace {

constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "neutral", "satisfied", "dissatisfied", "excited",
    "fearful", "apologetic", "abusive"};
constexpr std::array<std::string_view, kNumConducts> kConductNames = {
    "neutral", "compassionate", "apologetic", "enthusiastic", "appreciative"};
constexpr std::array<std::string_view, kNumIntents> kIntentNames = {
    "inform", "request", "recommend", "book", "nooffer",
    "reqmore", "bye",    "greet",     "confirm"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <typename Enum, std::size_t N>
bool lookup(const std::array<std::string_view, N>& names, std::string_view s,
            Enum* out) {
  const std::string key = lower(s);
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == key) {
      *out = static_cast<Enum>(i);
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view name_of(UserEmotion e) { return kEmotionNames[index_of(e)]; }
std::string_view name_of(Conduct c) { return kConductNames[index_of(c)]; }
std::string_view name_of(Intent i) { return kIntentNames[index_of(i)]; }

bool try_parse_emotion(std::string_view s, UserEmotion* out) {
  return lookup(kEmotionNames, s, out);
}

bool try_parse_conduct(std::string_view s, Conduct* out) {
  return lookup(kConductNames, s, out);
}

UserEmotion parse_emotion(std::string_view s) {
  UserEmotion e;
  if (!lookup(kEmotionNames, s, &e))
    throw std::invalid_argument("unknown emotion label '" + std::string(s) + "'");
  return e;
}

Conduct parse_conduct(std::string_view s) {
  Conduct c;
  if (!lookup(kConductNames, s, &c))
    throw std::invalid_argument("unknown conduct label '" + std::string(s) + "'");
  return c;
}

Intent parse_intent(std::string_view s) {
  Intent i;
  // "no_offer" and "no-offer" are common spellings in dialogue corpora.
  std::string key = lower(s);
  key.erase(std::remove_if(key.begin(), key.end(),
                           [](char c) { return c == '_' || c == '-'; }),
            key.end());
  if (!lookup(kIntentNames, key, &i))
    throw std::invalid_argument("unknown intent '" + std::string(s) + "'");
  return i;
}

}  // namespace affectod
