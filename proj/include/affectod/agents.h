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

#ifndef AFFECTOD_AGENTS_H_
#define AFFECTOD_AGENTS_H_

#include <array>
#include <memory>
#include <vector>

#include "affectod/model.h"
#include "affectod/ontology.h"
#include "affectod/rng.h"
#include "affectod/state.h"
#include "affectod/vocab.h"

namespace affectod {

struct Decision {
  std::vector<SemanticAct> acts;  // grounded
  Conduct conduct = Conduct::kNeutral;
  std::vector<std::size_t> tokens;
  std::vector<double> features;
  double log_prob = 0.0;
  double value = 0.0;
};

class DialoguePolicy {
 public:
  virtual ~DialoguePolicy() = default;
  virtual Decision decide(const DialogueState& state, Rng& rng) const = 0;
};

// Learned policy: featurize, decode, ground.
class NeuralPolicy : public DialoguePolicy {
 public:
  NeuralPolicy(const PolicyModel& model, const Ontology& ontology, DecodeMode mode)
      : model_(&model), ontology_(&ontology), mode_(mode) {}
  Decision decide(const DialogueState& state, Rng& rng) const override;

 private:
  const PolicyModel* model_;
  const Ontology* ontology_;
  DecodeMode mode_;
};

// Hand-written desk operator over the same token inventory. Answers the
// active domain: book when asked, inform outstanding requests, report no
// offer on an empty match, otherwise recommend. With probability `noise`
// a turn's acts are replaced by a random token subset. Conduct is drawn
// from `conduct_marginal` independently of the state.
struct RulePolicyConfig {
  double noise = 0.0;
  std::array<double, kNumConducts> conduct_marginal = {1.0, 0.0, 0.0, 0.0, 0.0};
  bool emit_conduct = true;
};

class RulePolicy : public DialoguePolicy {
 public:
  RulePolicy(const Ontology& ontology, RulePolicyConfig config = {});
  Decision decide(const DialogueState& state, Rng& rng) const override;
  // Act tokens the noiseless operator would emit.
  std::vector<std::size_t> correct_tokens(const DialogueState& state) const;
  const Vocabulary& vocab() const { return vocab_; }

 private:
  const Ontology* ontology_;
  Vocabulary vocab_;
  RulePolicyConfig config_;
};

// Degenerate policy that always says goodbye.
class ByePolicy : public DialoguePolicy {
 public:
  Decision decide(const DialogueState& state, Rng& rng) const override;
};

// Conduct marginal of the annotated desk corpus: neutral, compassionate,
// apologetic, enthusiastic, appreciative.
inline constexpr std::array<double, kNumConducts> kCorpusConductMarginal = {0.730, 0.002, 0.043,
                                                                            0.089, 0.136};

}  // namespace affectod

#endif  // AFFECTOD_AGENTS_H_
