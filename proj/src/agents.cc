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

#include "affectod/agents.h"

#include <algorithm>

namespace affectod {

Decision NeuralPolicy::decide(const DialogueState& state, Rng& rng) const {
  Decision d;
  d.features = featurize(state, *ontology_, model_->config().emotion_in_state);
  DecodeResult r = model_->decide(d.features, mode_, rng);
  d.acts = ground(r.acts, model_->vocab(), state, *ontology_);
  d.conduct = model_->config().conduct_output ? r.conduct : Conduct::kNeutral;
  d.tokens = std::move(r.tokens);
  d.log_prob = r.log_prob;
  d.value = r.value;
  return d;
}

RulePolicy::RulePolicy(const Ontology& ontology, RulePolicyConfig config)
    : ontology_(&ontology), vocab_(ontology), config_(config) {}

std::vector<std::size_t> RulePolicy::correct_tokens(const DialogueState& state) const {
  std::vector<std::size_t> out;
  auto push = [&](Intent i, const std::string& d, std::optional<std::string_view> slot) {
    if (auto t = vocab_.find(i, d, slot)) out.push_back(*t);
  };
  if (state.active_domain.empty() || state.active_domain == kGeneralDomain) {
    push(Intent::kReqMore, kGeneralDomain, std::nullopt);
    return out;
  }
  const std::string& d = state.active_domain;
  const DomainSchema& schema = ontology_->domain(d);
  const DomainState& ds = state.at(*ontology_, d);
  const bool valid_offer =
      ds.offered && Ontology::satisfies(ontology_->entities(d)[*ds.offered], ds.constraints);
  if (!ds.constraints.empty() && ds.match_count == 0) {
    push(Intent::kNoOffer, d, std::nullopt);
  } else if (!valid_offer && !ds.constraints.empty()) {
    push(Intent::kRecommend, d, std::string_view(kNameSlot));
  } else if (ds.booking_requested && !ds.booking_done && valid_offer && schema.bookable) {
    push(Intent::kBook, d, std::nullopt);
  } else if (!ds.requested.empty() && valid_offer) {
    for (const auto& s : schema.requestable)
      if (ds.requested.count(s)) push(Intent::kInform, d, std::string_view(s));
  }
  if (out.empty()) push(Intent::kReqMore, kGeneralDomain, std::nullopt);
  if (out.size() > 6) out.resize(6);
  return out;
}

Decision RulePolicy::decide(const DialogueState& state, Rng& rng) const {
  Decision d;
  std::vector<std::size_t> acts = correct_tokens(state);
  if (config_.noise > 0.0 && rng.bernoulli(config_.noise)) {
    acts.clear();
    const std::size_t k = 1 + rng.below(2);
    while (acts.size() < k) {
      const std::size_t t = rng.below(vocab_.num_acts());
      if (std::find(acts.begin(), acts.end(), t) == acts.end()) acts.push_back(t);
    }
  }
  d.acts = ground(acts, vocab_, state, *ontology_);
  d.tokens = acts;
  d.tokens.push_back(vocab_.stop());
  if (config_.emit_conduct) {
    d.conduct = kAllConducts[rng.categorical(config_.conduct_marginal)];
    d.tokens.push_back(vocab_.conduct_token(d.conduct));
  }
  return d;
}

Decision ByePolicy::decide(const DialogueState&, Rng&) const {
  Decision d;
  d.acts = {SemanticAct::bye()};
  return d;
}

}  // namespace affectod
