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

#ifndef AFFECTOD_EPISODE_H_
#define AFFECTOD_EPISODE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "affectod/act.h"
#include "affectod/goal.h"
#include "affectod/labels.h"

namespace affectod {

struct RewardBreakdown {
  double task = 0.0;
  double emotion = 0.0;
  double total() const { return task + emotion; }
  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

// One user message and the system response to it. The closing user turn
// (goodbye, or the turn cap) has no system response and no reward.
struct Turn {
  int index = 0;
  std::string user_utterance;
  std::vector<SemanticAct> user_acts;
  UserEmotion true_emotion = UserEmotion::kNeutral;       // simulator side
  UserEmotion perceived_emotion = UserEmotion::kNeutral;  // recogniser side
  double perceived_confidence = 1.0;
  std::vector<SemanticAct> system_acts;
  Conduct conduct = Conduct::kNeutral;
  std::string system_utterance;
  std::optional<RewardBreakdown> reward;

  bool has_system_response() const { return !system_acts.empty(); }
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Outcome {
  bool success = false;
  bool inform = false;
  double total_return = 0.0;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct EpisodeRecord {
  UserGoal goal;
  std::vector<Turn> turns;
  Outcome outcome;
  std::uint64_t seed = 0;
  std::string checkpoint_id;
  std::string config_hash;
  bool aborted = false;
  std::string abort_reason;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

void to_json(Json& j, const RewardBreakdown& r);
void from_json(const Json& j, RewardBreakdown& r);
void to_json(Json& j, const Turn& t);
void from_json(const Json& j, Turn& t);
void to_json(Json& j, const EpisodeRecord& e);
void from_json(const Json& j, EpisodeRecord& e);

// One EpisodeRecord per line.
void write_episodes_jsonl(const std::string& path, const std::vector<EpisodeRecord>& episodes);
std::vector<EpisodeRecord> read_episodes_jsonl(const std::string& path);

}  // namespace affectod

#endif  // AFFECTOD_EPISODE_H_
