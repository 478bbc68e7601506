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

#ifndef AFFECTOD_STATE_H_
#define AFFECTOD_STATE_H_

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "affectod/act.h"
#include "affectod/labels.h"
#include "affectod/ontology.h"

namespace affectod {

// Coarse database-match count used by the policy.
enum class MatchBucket { kNone = 0, kOne, kFew, kMany };
inline constexpr std::size_t kNumBuckets = 4;
MatchBucket bucket_of(std::size_t count);

struct DomainState {
  Constraints constraints;
  std::set<std::string> requested;  // outstanding user requests
  std::map<std::string, std::string> booking_info;
  bool booking_requested = false;
  bool booking_done = false;
  bool no_offer_given = false;
  std::size_t match_count = 0;
  std::optional<std::size_t> offered;  // entity the system last offered

  friend bool operator==(const DomainState&, const DomainState&) = default;
};

// Task state extended with the perceived user emotion. `domains` is aligned
// with Ontology::domains().
struct DialogueState {
  std::vector<DomainState> domains;
  std::vector<SemanticAct> last_user_acts;
  std::vector<SemanticAct> last_system_acts;
  int user_repeats = 0;  // consecutive user turns identical to the one before
  std::string active_domain;
  UserEmotion perceived_emotion = UserEmotion::kNeutral;
  double perceived_confidence = 1.0;
  std::deque<std::string> history;  // most recent utterances, oldest first
  bool user_closed = false;

  static DialogueState initial(const Ontology& ontology);

  const DomainState& at(const Ontology& ontology, std::string_view domain) const;
  DomainState& at(const Ontology& ontology, std::string_view domain);

  friend bool operator==(const DialogueState&, const DialogueState&) = default;
};

inline constexpr std::size_t kHistoryLength = 3;

// Folds user acts into the state: informs overwrite constraints (last write
// wins), requests become outstanding, book sets the booking request, and
// match counts are recomputed by exact database filtering. Empty input
// returns the state unchanged. Throws TrackingError (and changes nothing)
// when an act references an unknown domain or slot.
DialogueState track(const DialogueState& prev, std::span<const SemanticAct> user_acts,
                    const Ontology& ontology);

// Records what the system just did: answered requests are cleared, offers
// and bookings are remembered, and the acts are kept for the next turn.
void apply_system_acts(DialogueState& state, std::span<const SemanticAct> system_acts,
                       const Ontology& ontology);

void push_history(DialogueState& state, std::string utterance,
                  std::size_t keep = kHistoryLength);

// Entity the system talks about in a domain: the previous offer while it
// still satisfies the constraints, else the first database match.
std::optional<std::size_t> selected_entity(const DialogueState& state, const Ontology& ontology,
                                           std::string_view domain);

}  // namespace affectod

#endif  // AFFECTOD_STATE_H_
