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

#ifndef AFFECTOD_ERC_H_
#define AFFECTOD_ERC_H_

#include <array>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "affectod/labels.h"
#include "affectod/rng.h"
#include "affectod/state.h"

namespace affectod {

// Surface markers of each emotion in user text. Neutral has none. The
// simulated user draws its cue phrases from the same lexicon, so the
// recogniser sees exactly what the simulator expressed.
struct CueLexicon {
  std::array<std::vector<std::string>, kNumEmotions> cues;

  static CueLexicon defaults();
  const std::vector<std::string>& of(UserEmotion e) const { return cues[index_of(e)]; }
};

Json cue_lexicon_to_json(const CueLexicon& lexicon);
CueLexicon cue_lexicon_from_json(const Json& j);

// Row-stochastic confusion matrix: row = label read off the cues, column =
// label reported. Models an imperfect recogniser; errors are i.i.d. per turn.
class NoiseChannel {
 public:
  using Matrix = std::array<std::array<double, kNumEmotions>, kNumEmotions>;

  NoiseChannel();  // identity
  // Throws ConfigError unless every row is non-negative and sums to 1 +- 1e-9.
  explicit NoiseChannel(const Matrix& m);

  static NoiseChannel identity() { return NoiseChannel(); }
  // Keeps the label with probability 1 - p, otherwise picks one of the other
  // six labels uniformly.
  static NoiseChannel uniform_flip(double p);

  double prob(UserEmotion from, UserEmotion to) const { return m_[index_of(from)][index_of(to)]; }
  UserEmotion sample(UserEmotion from, Rng& rng) const;
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

Json noise_channel_to_json(const NoiseChannel& channel);
NoiseChannel noise_channel_from_json(const Json& j);

struct ErcConfig {
  // No cue and a verbatim repetition of a recent utterance reads as
  // dissatisfaction. Meant for human text; simulated users always surface
  // their cues.
  bool repetition_prior = false;
};

struct ErcResult {
  UserEmotion label = UserEmotion::kNeutral;
  double confidence = 1.0;
  UserEmotion cue_label = UserEmotion::kNeutral;  // before the noise channel
};

// Cue lookup over the utterance plus context features, followed by the
// noise channel. Throws std::invalid_argument on an empty utterance.
ErcResult recognize_emotion(std::string_view utterance, const std::deque<std::string>& history,
                            const DialogueState& state, const CueLexicon& lexicon,
                            const NoiseChannel& channel, const ErcConfig& config, Rng& rng);

// Case-insensitive phrase search with word boundaries at both ends.
bool contains_phrase(std::string_view text, std::string_view phrase);

}  // namespace affectod

#endif  // AFFECTOD_ERC_H_
