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

#include "affectod/reward.h"

#include "affectod/errors.h"

namespace affectod {

void RewardConfig::validate() const {
  if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
  if (max_turns < 2) throw ConfigError("max_turns must be at least 2");
  const RewardConfig reference;
  if (valence != reference.valence)
    throw ConfigError("valence map must be c(satisfied)=1, c(dissatisfied)=c(abusive)=-1, else 0");
}

double emotion_reward(UserEmotion perceived, const RewardConfig& config) {
  return config.beta * static_cast<double>(config.valence[index_of(perceived)]) - config.beta;
}

double task_reward(TurnOutcome outcome, const RewardConfig& config) {
  const double t = static_cast<double>(config.max_turns);
  switch (outcome) {
    case TurnOutcome::kOngoing:
      return config.turn_reward;
    case TurnOutcome::kSuccess:
      return config.terminal_mode == TerminalMode::kFixed ? config.success_reward : 2.0 * t;
    case TurnOutcome::kFailure:
      return config.terminal_mode == TerminalMode::kFixed ? config.failure_reward : -t;
  }
  return 0.0;
}

RewardBreakdown total_reward(TurnOutcome outcome, UserEmotion perceived,
                             const RewardConfig& config) {
  return {task_reward(outcome, config), emotion_reward(perceived, config)};
}

void to_json(Json& j, const RewardConfig& c) {
  j = Json{{"beta", c.beta},
           {"turn_reward", c.turn_reward},
           {"success_reward", c.success_reward},
           {"failure_reward", c.failure_reward},
           {"terminal_mode", c.terminal_mode == TerminalMode::kFixed ? "fixed" : "turn_scaled"},
           {"max_turns", c.max_turns}};
}

void from_json(const Json& j, RewardConfig& c) {
  c.beta = j.value("beta", c.beta);
  c.turn_reward = j.value("turn_reward", c.turn_reward);
  c.success_reward = j.value("success_reward", c.success_reward);
  c.failure_reward = j.value("failure_reward", c.failure_reward);
  const std::string mode = j.value("terminal_mode", std::string("fixed"));
  if (mode == "fixed")
    c.terminal_mode = TerminalMode::kFixed;
  else if (mode == "turn_scaled")
    c.terminal_mode = TerminalMode::kTurnScaled;
  else
    throw ConfigError("unknown terminal_mode '" + mode + "'");
  c.max_turns = j.value("max_turns", c.max_turns);
  c.validate();
}

}  // namespace affectod
