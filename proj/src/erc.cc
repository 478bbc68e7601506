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

#include "affectod/erc.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "affectod/errors.h"

namespace affectod {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Lower-case alphanumerics separated by single spaces.
std::string normalise(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (is_word_char(c)) {
      if (space && !out.empty()) out += ' ';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      space = false;
    } else {
      space = true;
    }
  }
  return out;
}

}  // namespace

bool contains_phrase(std::string_view text, std::string_view phrase) {
  if (phrase.empty()) return false;
  const std::string t = lower(text);
  const std::string p = lower(phrase);
  for (std::size_t pos = t.find(p); pos != std::string::npos; pos = t.find(p, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(t[pos - 1]) || !is_word_char(p.front());
    const std::size_t end = pos + p.size();
    const bool right_ok = end == t.size() || !is_word_char(t[end]) || !is_word_char(p.back());
    if (left_ok && right_ok) return true;
  }
  return false;
}

CueLexicon CueLexicon::defaults() {
  CueLexicon l;
  l.cues[index_of(UserEmotion::kSatisfied)] = {"great, thank you", "that's perfect",
                                               "wonderful, thanks", "excellent", "thanks a lot",
                                               "perfect"};
  l.cues[index_of(UserEmotion::kDissatisfied)] = {"that is not what i asked", "this is frustrating",
                                                  "you are not listening", "that's wrong",
                                                  "not helpful", "annoying"};
  l.cues[index_of(UserEmotion::kExcited)] = {"i'm so excited", "how exciting", "i can't wait"};
  l.cues[index_of(UserEmotion::kFearful)] = {"oh no, i'm worried", "this is really stressful",
                                             "scared", "worried"};
  l.cues[index_of(UserEmotion::kApologetic)] = {"sorry, my mistake", "apologies for the confusion",
                                                "my bad", "sorry"};
  l.cues[index_of(UserEmotion::kAbusive)] = {"you are completely useless", "what a useless system",
                                             "useless", "stupid", "idiot"};
  return l;
}

Json cue_lexicon_to_json(const CueLexicon& lexicon) {
  Json j = Json::object();
  for (UserEmotion e : kAllEmotions) j[std::string(name_of(e))] = lexicon.of(e);
  return j;
}

CueLexicon cue_lexicon_from_json(const Json& j) {
  CueLexicon l;
  try {
    for (auto it = j.begin(); it != j.end(); ++it)
      l.cues[index_of(parse_emotion(it.key()))] = it.value().get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed cue lexicon: ") + e.what());
  }
  if (!l.of(UserEmotion::kNeutral).empty()) throw ConfigError("neutral must not have cues");
  return l;
}

NoiseChannel::NoiseChannel() : m_{} {
  for (std::size_t i = 0; i < kNumEmotions; ++i) m_[i][i] = 1.0;
}

NoiseChannel::NoiseChannel(const Matrix& m) : m_(m) {
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    double sum = 0.0;
    for (double p : m_[i]) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("noise channel entries must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("noise channel row '" + std::string(name_of(kAllEmotions[i])) +
                        "' sums to " + std::to_string(sum));
  }
}

NoiseChannel NoiseChannel::uniform_flip(double p) {
  if (p < 0.0 || p > 1.0) throw ConfigError("flip probability must lie in [0, 1]");
  Matrix m{};
  for (std::size_t i = 0; i < kNumEmotions; ++i)
    for (std::size_t j = 0; j < kNumEmotions; ++j)
      m[i][j] = (i == j) ? 1.0 - p : p / static_cast<double>(kNumEmotions - 1);
  return NoiseChannel(m);
}

UserEmotion NoiseChannel::sample(UserEmotion from, Rng& rng) const {
  const auto& row = m_[index_of(from)];
  return kAllEmotions[rng.categorical(row)];
}

Json noise_channel_to_json(const NoiseChannel& channel) {
  Json j = Json::object();
  for (UserEmotion from : kAllEmotions) {
    Json row = Json::object();
    for (UserEmotion to : kAllEmotions) row[std::string(name_of(to))] = channel.prob(from, to);
    j[std::string(name_of(from))] = row;
  }
  return j;
}

NoiseChannel noise_channel_from_json(const Json& j) {
  if (j.contains("uniform_flip")) return NoiseChannel::uniform_flip(j["uniform_flip"].get<double>());
  NoiseChannel::Matrix m{};
  try {
    for (UserEmotion from : kAllEmotions) {
      const Json& row = j.at(std::string(name_of(from)));
      for (UserEmotion to : kAllEmotions)
        m[index_of(from)][index_of(to)] = row.value(std::string(name_of(to)), 0.0);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed noise channel: ") + e.what());
  }
  return NoiseChannel(m);
}

ErcResult recognize_emotion(std::string_view utterance, const std::deque<std::string>& history,
                            const DialogueState& state, const CueLexicon& lexicon,
                            const NoiseChannel& channel, const ErcConfig& config, Rng& rng) {
  (void)state;
  if (utterance.empty()) throw std::invalid_argument("recognize_emotion: empty utterance");

  UserEmotion cue = UserEmotion::kNeutral;
  std::size_t best = 0;
  for (UserEmotion e : kAllEmotions) {
    for (const auto& phrase : lexicon.of(e)) {
      if (phrase.size() > best && contains_phrase(utterance, phrase)) {
        best = phrase.size();
        cue = e;
      }
    }
  }
  if (best == 0 && config.repetition_prior) {
    const std::string norm = normalise(utterance);
    for (const auto& h : history)
      if (!norm.empty() && normalise(h) == norm) cue = UserEmotion::kDissatisfied;
  }

  ErcResult r;
  r.cue_label = cue;
  r.label = channel.sample(cue, rng);
  r.confidence = channel.prob(cue, r.label);
  return r;
}

}  // namespace affectod
