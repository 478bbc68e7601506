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

#ifndef AFFECTOD_LABELS_H_
#define AFFECTOD_LABELS_H_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace affectod {

// User affect labels. The numeric order is the one used by feature
// vectors, confusion matrices and checkpoint files; do not reorder.
enum class UserEmotion {
  kNeutral = 0,
  kSatisfied,
  kDissatisfied,
  kExcited,
  kFearful,
  kApologetic,
  kAbusive,
};
inline constexpr std::size_t kNumEmotions = 7;
inline constexpr std::array<UserEmotion, kNumEmotions> kAllEmotions = {
    UserEmotion::kNeutral,  UserEmotion::kSatisfied, UserEmotion::kDissatisfied,
    UserEmotion::kExcited,  UserEmotion::kFearful,   UserEmotion::kApologetic,
    UserEmotion::kAbusive};

// System affective conduct.
enum class Conduct {
  kNeutral = 0,
  kCompassionate,
  kApologetic,
  kEnthusiastic,
  kAppreciative,
};
inline constexpr std::size_t kNumConducts = 5;
inline constexpr std::array<Conduct, kNumConducts> kAllConducts = {
    Conduct::kNeutral, Conduct::kCompassionate, Conduct::kApologetic,
    Conduct::kEnthusiastic, Conduct::kAppreciative};

enum class Intent {
  kInform = 0,
  kRequest,
  kRecommend,
  kBook,
  kNoOffer,
  kReqMore,
  kBye,
  kGreet,
  kConfirm,
};
inline constexpr std::size_t kNumIntents = 9;
inline constexpr std::array<Intent, kNumIntents> kAllIntents = {
    Intent::kInform, Intent::kRequest, Intent::kRecommend,
    Intent::kBook,   Intent::kNoOffer, Intent::kReqMore,
    Intent::kBye,    Intent::kGreet,   Intent::kConfirm};

inline std::size_t index_of(UserEmotion e) { return static_cast<std::size_t>(e); }
inline std::size_t index_of(Conduct c) { return static_cast<std::size_t>(c); }
inline std::size_t index_of(Intent i) { return static_cast<std::size_t>(i); }

// Lower-case wire names ("neutral", "satisfied", ...).
std::string_view name_of(UserEmotion e);
std::string_view name_of(Conduct c);
std::string_view name_of(Intent i);

// Parsing is case-insensitive; throws std::invalid_argument on unknown names.
UserEmotion parse_emotion(std::string_view s);
Conduct parse_conduct(std::string_view s);
Intent parse_intent(std::string_view s);

bool try_parse_emotion(std::string_view s, UserEmotion* out);
bool try_parse_conduct(std::string_view s, Conduct* out);

}  // namespace affectod

#endif  // AFFECTOD_LABELS_H_
