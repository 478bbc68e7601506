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

#ifndef AFFECTOD_VOCAB_H_
#define AFFECTOD_VOCAB_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affectod/act.h"
#include "affectod/labels.h"
#include "affectod/ontology.h"
#include "affectod/state.h"

namespace affectod {

// One decoder token: an ungrounded act (intent, domain, slot), STOP, or a
// conduct label.
struct Token {
  enum class Kind { kAct, kStop, kConduct };
  Kind kind = Kind::kAct;
  Intent intent = Intent::kInform;
  std::string domain;
  std::optional<std::string> slot;
  Conduct conduct = Conduct::kNeutral;
  friend bool operator==(const Token&, const Token&) = default;
};

std::string to_string(const Token& t);

// Fixed token inventory derived from an ontology. Per domain, in ontology
// order: inform over constrainable then requestable slots, recommend(name),
// request and confirm over constrainable slots, book (bookable domains),
// nooffer. Then reqmore, bye, greet, STOP and the five conduct tokens.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const Ontology& ontology);
  // Synthetic inventory with `num_acts` act tokens; used by tests.
  static Vocabulary toy(std::size_t num_acts);

  std::size_t size() const { return tokens_.size(); }
  std::size_t num_acts() const { return stop_; }
  std::size_t stop() const { return stop_; }
  std::size_t conduct_token(Conduct c) const { return stop_ + 1 + index_of(c); }
  const Token& at(std::size_t i) const { return tokens_.at(i); }
  bool is_act(std::size_t i) const { return i < stop_; }
  bool is_conduct(std::size_t i) const { return i > stop_ && i < tokens_.size(); }

  // Token index of an ungrounded act, or nullopt.
  std::optional<std::size_t> find(Intent intent, std::string_view domain,
                                  std::optional<std::string_view> slot) const;
  // Token index of a (possibly grounded) act: values are ignored; a booking
  // confirmation maps to the book token.
  std::optional<std::size_t> find(const SemanticAct& act) const;

 private:
  std::vector<Token> tokens_;
  std::size_t stop_ = 0;
};

// Feature layout, per domain in ontology order:
//   |constrainable| constraint-filled flags, |requestable| outstanding
//   request flags, 4 match-bucket one-hot (all zero while the domain has no
//   constraints), booking requested, booking done, valid offer, active
//   domain, nooffer given, and which of inform, recommend, request, confirm,
//   book, nooffer the system used in this domain on its previous turn;
// then previous-turn reqmore, bye, greet flags, two flags for a user repeating
// the same acts once and at least twice, and a 7-way perceived emotion
// one-hot (zeroed when emotion is not part of the state).
std::size_t feature_dim(const Ontology& ontology);
std::vector<double> featurize(const DialogueState& state, const Ontology& ontology,
                              bool emotion_in_state = true);
// Offset of the emotion block.
inline std::size_t emotion_offset(const Ontology& ontology) {
  return feature_dim(ontology) - kNumEmotions;
}

// Turns act tokens into concrete acts against the tracked state. Values come
// from the selected entity (inform, recommend, book) or the tracked
// constraints (confirm). Offers need at least one tracked constraint in the
// domain and booking also needs a booking request. Tokens that cannot be
// grounded are dropped and an empty result becomes reqmore.
std::vector<SemanticAct> ground(std::span<const std::size_t> act_tokens, const Vocabulary& vocab,
                                const DialogueState& state, const Ontology& ontology);

}  // namespace affectod

#endif  // AFFECTOD_VOCAB_H_
