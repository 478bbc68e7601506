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

#ifndef AFFECTOD_TRIAL_H_
#define AFFECTOD_TRIAL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "affectod/episode.h"
#include "affectod/erc.h"
#include "affectod/goal.h"
#include "affectod/model.h"
#include "affectod/nlg.h"
#include "affectod/ontology.h"
#include "affectod/rng.h"
#include "affectod/state.h"
#include "affectod/vocab.h"

namespace affectod {

// HTTP-mappable failures. 400, 404, 409 respectively.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keyword and synonym parser for free user text over the desk ontology.
// Shared slots (area, price) attach to the domain named in the text, else
// the domain implied by a domain-specific value, else the active domain.
class ActParser {
 public:
  explicit ActParser(const Ontology& ontology);
  // Empty when nothing was understood.
  std::vector<SemanticAct> parse(std::string_view text, const DialogueState& state) const;

 private:
  const Ontology* ontology_;
};

enum class Variant { kEmotional, kBaseline };
std::string_view name_of(Variant v);
Variant parse_variant(std::string_view s);  // throws ValidationError

struct Rating {
  bool success = false;
  int sentiment = 3;  // 1 very negative .. 5 very positive
  std::string idempotency_key;
  friend bool operator==(const Rating&, const Rating&) = default;
};

struct TrialTurn {
  Turn turn;  // user side: user_utterance, user_acts, perceived emotion
  bool clarification = false;
  friend bool operator==(const TrialTurn&, const TrialTurn&) = default;
};

struct TrialSession {
  std::string id;
  Variant variant = Variant::kEmotional;
  std::string checkpoint;
  std::uint64_t seed = 0;
  UserGoal goal;
  std::string goal_text;
  std::vector<TrialTurn> turns;
  std::optional<Rating> rating;
  bool closed = false;
  std::vector<std::string> quality_flags;

  // Live stack state; rebuilt by replay on load.
  DialogueState state;
  Rng erc_rng;
  Rng nlg_rng;
};

Json session_to_json(const TrialSession& s);

struct QualityRules {
  double min_median_tokens = 3.0;
  double max_non_alpha_ratio = 0.5;
  // "Yes, the system found it" although no entity was ever offered.
  bool reject_success_without_offer = true;
};

struct QualityVerdict {
  std::string id;
  bool kept = true;
  std::vector<std::string> reasons;  // short-utterance, non-natural-language, contradictory-rating
};

// Closed sessions only; open ones are skipped.
std::vector<QualityVerdict> quality_filter(std::span<const TrialSession* const> sessions,
                                           const QualityRules& rules = {});
QualityVerdict judge_quality(const TrialSession& session, const QualityRules& rules = {});

struct TrialConfig {
  int max_turns = 20;
  std::uint64_t seed = 1;  // sessions without an explicit seed derive theirs from this
  GoalConfig goals;
  QualityRules quality;
  ErcConfig erc{.repetition_prior = true};
};

// Session manager over a directory of checkpoints (<id>.json) and an
// append-only store: <store>/index.jsonl plus <store>/sessions/<id>.jsonl.
// Every event is flushed before the call returns. Existing sessions are
// replayed through the stack on construction.
class TrialService {
 public:
  TrialService(const Ontology& ontology, std::string checkpoint_dir, std::string store_dir,
               TrialConfig config = {});

  struct Created {
    std::string id;
    std::string goal_text;
    UserGoal goal;
  };
  Created create_session(Variant variant, const std::string& checkpoint,
                         std::optional<std::uint64_t> seed = std::nullopt);

  struct Reply {
    std::string system_text;
    int turn_index = 0;
    bool closed = false;
    bool clarification = false;
  };
  Reply post_message(const std::string& id, const std::string& text);

  // A repeat carrying the stored idempotency key and the same answers is a
  // no-op and returns false; any other second rating is a ConflictError.
  bool submit_rating(const std::string& id, bool success, int sentiment,
                     const std::string& idempotency_key = "");

  Json get_session(const std::string& id) const;
  Json report() const;

  std::vector<std::string> checkpoints() const;
  std::size_t session_count() const;

  static constexpr const char* kClarification =
      "Sorry, I did not understand that. Could you rephrase it using the terms from your goal?";
  static constexpr const char* kClosing =
      "We have reached the end of this conversation. Thank you for taking part!";

 private:
  struct Slot {
    mutable std::mutex mu;
    TrialSession session;
  };
  struct Stack {
    PolicyModel model;
  };

  const Stack& stack(const std::string& checkpoint, Variant variant) const;
  Slot& slot(const std::string& id) const;
  Reply step(TrialSession& s, const std::string& text) const;
  void append(const std::string& id, const Json& event) const;
  void replay(const std::string& id);

  const Ontology* ontology_;
  std::string checkpoint_dir_;
  std::string store_dir_;
  TrialConfig config_;
  Vocabulary vocab_;
  ActParser parser_;
  CueLexicon lexicon_ = CueLexicon::defaults();
  TemplateBank bank_ = TemplateBank::defaults();

  mutable std::shared_mutex mu_;  // guards sessions_, next_id_ and the index file
  std::map<std::string, std::unique_ptr<Slot>> sessions_;
  mutable std::mutex stack_mu_;
  mutable std::map<std::string, std::unique_ptr<Stack>> stacks_;
  std::uint64_t next_id_ = 1;
};

}  // namespace affectod

#endif  // AFFECTOD_TRIAL_H_
