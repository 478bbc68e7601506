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

#ifndef AFFECTOD_REWARD_H_
#define AFFECTOD_REWARD_H_

#include <array>

#include "affectod/act.h"
#include "affectod/episode.h"
#include "affectod/labels.h"

namespace affectod {

enum class TerminalMode {
  kFixed,       // success_reward / failure_reward
  kTurnScaled,  // 2T on success, -T on failure, T = max_turns
};

struct RewardConfig {
  double beta = 2.0;
  double turn_reward = -1.0;
  double success_reward = 80.0;
  double failure_reward = -40.0;
  TerminalMode terminal_mode = TerminalMode::kFixed;
  int max_turns = 20;
  // Valence c(e) per emotion. Only satisfied earns +1; dissatisfied and
  // abusive earn -1; everything the system did not elicit stays at 0.
  std::array<int, kNumEmotions> valence = {0, 1, -1, 0, 0, 0, -1};

  // Throws ConfigError for a negative beta, max_turns < 2 or a valence map
  // that differs from the one above.
  void validate() const;
};

enum class TurnOutcome { kOngoing, kSuccess, kFailure };

// beta * c(e) - beta; never positive.
double emotion_reward(UserEmotion perceived, const RewardConfig& config);
double task_reward(TurnOutcome outcome, const RewardConfig& config);
RewardBreakdown total_reward(TurnOutcome outcome, UserEmotion perceived,
                             const RewardConfig& config);

void to_json(Json& j, const RewardConfig& c);
void from_json(const Json& j, RewardConfig& c);

}  // namespace affectod

#endif  // AFFECTOD_REWARD_H_
