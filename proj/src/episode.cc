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

#include "affectod/episode.h"

#include <fstream>

#include "affectod/errors.h"

namespace affectod {

void to_json(Json& j, const RewardBreakdown& r) { j = Json{{"task", r.task}, {"emotion", r.emotion}}; }

void from_json(const Json& j, RewardBreakdown& r) {
  r.task = j.at("task").get<double>();
  r.emotion = j.at("emotion").get<double>();
}

void to_json(Json& j, const Turn& t) {
  j = Json{{"index", t.index},
           {"user_utterance", t.user_utterance},
           {"user_acts", t.user_acts},
           {"true_emotion", name_of(t.true_emotion)},
           {"perceived_emotion", name_of(t.perceived_emotion)},
           {"perceived_confidence", t.perceived_confidence},
           {"system_acts", t.system_acts},
           {"conduct", name_of(t.conduct)},
           {"system_utterance", t.system_utterance}};
  if (t.reward) j["reward"] = *t.reward;
}

void from_json(const Json& j, Turn& t) {
  t.index = j.at("index").get<int>();
  t.user_utterance = j.value("user_utterance", "");
  t.user_acts = j.value("user_acts", std::vector<SemanticAct>{});
  t.true_emotion = parse_emotion(j.value("true_emotion", "neutral"));
  t.perceived_emotion = parse_emotion(j.value("perceived_emotion", "neutral"));
  t.perceived_confidence = j.value("perceived_confidence", 1.0);
  t.system_acts = j.value("system_acts", std::vector<SemanticAct>{});
  t.conduct = parse_conduct(j.value("conduct", "neutral"));
  t.system_utterance = j.value("system_utterance", "");
  t.reward.reset();
  if (j.contains("reward") && !j["reward"].is_null()) t.reward = j["reward"].get<RewardBreakdown>();
}

void to_json(Json& j, const EpisodeRecord& e) {
  j = Json{{"seed", e.seed},
           {"goal", e.goal},
           {"turns", e.turns},
           {"outcome",
            {{"success", e.outcome.success},
             {"inform", e.outcome.inform},
             {"return", e.outcome.total_return}}},
           {"metadata",
            {{"checkpoint", e.checkpoint_id},
             {"config_hash", e.config_hash},
             {"aborted", e.aborted}}}};
  if (e.aborted) j["metadata"]["abort_reason"] = e.abort_reason;
}

void from_json(const Json& j, EpisodeRecord& e) {
  e.seed = j.value("seed", std::uint64_t{0});
  e.goal = j.at("goal").get<UserGoal>();
  e.turns = j.at("turns").get<std::vector<Turn>>();
  const Json& o = j.at("outcome");
  e.outcome.success = o.value("success", false);
  e.outcome.inform = o.value("inform", false);
  e.outcome.total_return = o.value("return", 0.0);
  const Json m = j.value("metadata", Json::object());
  e.checkpoint_id = m.value("checkpoint", "");
  e.config_hash = m.value("config_hash", "");
  e.aborted = m.value("aborted", false);
  e.abort_reason = m.value("abort_reason", "");
}

void write_episodes_jsonl(const std::string& path, const std::vector<EpisodeRecord>& episodes) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (const auto& e : episodes) out << Json(e).dump() << '\n';
}

std::vector<EpisodeRecord> read_episodes_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<EpisodeRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<EpisodeRecord>());
    } catch (const std::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace affectod
