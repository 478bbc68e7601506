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

#include "affectod/trial.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "affectod/agents.h"
#include "affectod/errors.h"

namespace affectod {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kGoalStream = 11;
constexpr std::uint64_t kErcStream = 3;
constexpr std::uint64_t kNlgStream = 5;

// Applied before value matching, longest phrases first within each group.
const std::vector<std::pair<std::string, std::string>> kSynonyms = {
    {"city centre", "centre"},      {"city center", "centre"},
    {"center", "centre"},           {"downtown", "centre"},
    {"moderately priced", "moderate"}, {"mid priced", "moderate"},
    {"mid-priced", "moderate"},     {"inexpensive", "cheap"},
    {"budget", "cheap"},            {"low cost", "cheap"},
    {"high end", "expensive"},      {"upscale", "expensive"},
    {"pricey", "expensive"},        {"two stars", "two star"},
    {"three stars", "three star"},  {"four stars", "four star"},
    {"2 star", "two star"},         {"3 star", "three star"},
    {"4 star", "four star"},        {"2-star", "two star"},
    {"3-star", "three star"},       {"4-star", "four star"},
    {"2 stars", "two star"},        {"3 stars", "three star"},
    {"4 stars", "four star"},       {"movie theatre", "cinema"},
    {"movies", "cinema"},           {"theater", "theatre"},
    {"art gallery", "gallery"},     {"free entry", "free"},
    {"free admission", "free"},     {"no entrance fee", "free"},
};

const std::map<std::string, std::vector<std::string>> kDomainWords = {
    {"restaurant", {"restaurant", "food", "eat", "dinner", "lunch", "dine"}},
    {"hotel", {"hotel", "stay", "room", "accommodation", "guesthouse", "lodging"}},
    {"attraction", {"attraction", "visit", "sightseeing", "things to do", "something to do"}},
};

const std::map<std::string, std::vector<std::string>> kRequestWords = {
    {"phone", {"phone", "telephone", "contact number"}},
    {"address", {"address", "located", "where is it"}},
    {"postcode", {"postcode", "post code", "postal code", "zip"}},
};

const std::vector<std::string> kBookWords = {"book", "reserve", "reservation"};
const std::vector<std::string> kByeWords = {"bye", "goodbye", "that is all", "that's all",
                                            "nothing else", "no thanks", "no thank you"};
const std::vector<std::string> kGreetWords = {"hello", "hi", "hey", "good morning", "good evening"};
const std::vector<std::string> kDays = {"monday", "tuesday", "wednesday", "thursday",
                                        "friday", "saturday", "sunday"};
const std::vector<std::string> kNumberWords = {"one", "two", "three", "four",
                                               "five", "six", "seven", "eight"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Position of `phrase` in `text` with word boundaries, or npos.
std::size_t find_phrase(const std::string& text, const std::string& phrase, std::size_t from = 0) {
  for (std::size_t p = text.find(phrase, from); p != std::string::npos; p = text.find(phrase, p + 1)) {
    const bool left = p == 0 || !word_char(text[p - 1]);
    const std::size_t end = p + phrase.size();
    const bool right = end >= text.size() || !word_char(text[end]);
    if (left && right) return p;
  }
  return std::string::npos;
}

bool has_any(const std::string& text, const std::vector<std::string>& words) {
  return std::any_of(words.begin(), words.end(),
                     [&](const std::string& w) { return find_phrase(text, w) != std::string::npos; });
}

std::string normalise(std::string_view raw) {
  std::string text = lower(raw);
  for (char& c : text)
    if (c == '?' || c == '!' || c == ',' || c == '.' || c == ';' || c == ':') c = ' ';
  for (const auto& [from, to] : kSynonyms) {
    for (std::size_t p = find_phrase(text, from); p != std::string::npos;
         p = find_phrase(text, from, p + to.size()))
      text.replace(p, from.size(), to);
  }
  return text;
}

bool is_shared(const Ontology& ontology, const std::string& slot, const std::string& value) {
  int domains = 0;
  for (const auto& d : ontology.domains()) {
    auto it = d.informable.find(slot);
    if (it != d.informable.end() &&
        std::find(it->second.begin(), it->second.end(), value) != it->second.end())
      ++domains;
  }
  return domains > 1;
}

}  // namespace

ActParser::ActParser(const Ontology& ontology) : ontology_(&ontology) {}

std::vector<SemanticAct> ActParser::parse(std::string_view raw, const DialogueState& state) const {
  const std::string text = normalise(raw);
  std::vector<SemanticAct> acts;
  if (text.find_first_not_of(' ') == std::string::npos) return acts;

  // domain named in the text, earliest mention first
  std::string target;
  std::size_t first = std::string::npos;
  for (const auto& d : ontology_->domains()) {
    auto it = kDomainWords.find(d.name);
    std::vector<std::string> words = it == kDomainWords.end() ? std::vector<std::string>{} : it->second;
    words.push_back(d.name);
    for (const auto& w : words) {
      const std::size_t p = find_phrase(text, w);
      if (p < first) {
        first = p;
        target = d.name;
      }
    }
  }
  if (target.empty()) {
    std::set<std::string> implied;
    for (const auto& d : ontology_->domains())
      for (const auto& [slot, values] : d.informable)
        for (const auto& v : values)
          if (!is_shared(*ontology_, slot, v) && find_phrase(text, v) != std::string::npos)
            implied.insert(d.name);
    if (implied.size() == 1) target = *implied.begin();
  }
  if (target.empty() && !state.active_domain.empty() && state.active_domain != kGeneralDomain)
    target = state.active_domain;

  if (!target.empty()) {
    const DomainSchema& d = ontology_->domain(target);
    for (const auto& [slot, values] : d.informable) {
      // longest value wins within a slot ("two star" before "two")
      std::vector<std::string> sorted = values;
      std::sort(sorted.begin(), sorted.end(),
                [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
      for (const auto& v : sorted)
        if (find_phrase(text, v) != std::string::npos) {
          acts.push_back(SemanticAct::inform(target, slot, v));
          break;
        }
    }
    for (const auto& slot : d.requestable) {
      auto it = kRequestWords.find(slot);
      const std::vector<std::string> words = it == kRequestWords.end() ? std::vector<std::string>{slot}
                                                                      : it->second;
      if (has_any(text, words)) acts.push_back(SemanticAct::request(target, slot));
    }
    if (d.bookable && has_any(text, kBookWords)) {
      static const std::regex people_re(
          R"((\d+|one|two|three|four|five|six|seven|eight)\s+(people|persons|person|guests|of us|adults))");
      static const std::regex for_re(R"(\bfor\s+(\d+)\b)");
      std::smatch m;
      std::string people;
      if (std::regex_search(text, m, people_re) || std::regex_search(text, m, for_re)) {
        people = m[1].str();
        auto w = std::find(kNumberWords.begin(), kNumberWords.end(), people);
        if (w != kNumberWords.end()) people = std::to_string(w - kNumberWords.begin() + 1);
      }
      if (!people.empty() && d.is_booking_slot("people"))
        acts.push_back(SemanticAct::inform(target, "people", people));
      for (const auto& day : kDays)
        if (find_phrase(text, day) != std::string::npos && d.is_booking_slot("day")) {
          acts.push_back(SemanticAct::inform(target, "day", day));
          break;
        }
      acts.push_back(SemanticAct::book(target));
    }
  }
  if (has_any(text, kByeWords)) acts.push_back(SemanticAct::bye());
  if (acts.empty() && has_any(text, kGreetWords)) acts.push_back(SemanticAct::greet());
  return acts;
}

std::string_view name_of(Variant v) { return v == Variant::kBaseline ? "baseline" : "emotional"; }

Variant parse_variant(std::string_view s) {
  const std::string k = lower(s);
  if (k == "emotional" || k == "emoloop") return Variant::kEmotional;
  if (k == "baseline" || k == "simpleloop") return Variant::kBaseline;
  throw ValidationError("unknown variant '" + std::string(s) + "' (emotional or baseline)");
}

Json session_to_json(const TrialSession& s) {
  Json turns = Json::array();
  for (const auto& t : s.turns) {
    Json j = t.turn;
    j["clarification"] = t.clarification;
    turns.push_back(std::move(j));
  }
  Json j{{"id", s.id},
         {"variant", std::string(name_of(s.variant))},
         {"checkpoint", s.checkpoint},
         {"seed", s.seed},
         {"goal", s.goal},
         {"goal_text", s.goal_text},
         {"turns", std::move(turns)},
         {"closed", s.closed},
         {"quality_flags", s.quality_flags}};
  j["rating"] = s.rating ? Json{{"success", s.rating->success}, {"sentiment", s.rating->sentiment}}
                         : Json(nullptr);
  return j;
}

QualityVerdict judge_quality(const TrialSession& s, const QualityRules& rules) {
  QualityVerdict v;
  v.id = s.id;
  std::vector<double> tokens;
  std::size_t chars = 0, non_alpha = 0;
  for (const auto& t : s.turns) {
    const std::string& u = t.turn.user_utterance;
    std::size_t n = 0;
    bool in_word = false;
    for (char c : u) {
      const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
      if (!space && !in_word) ++n;
      in_word = !space;
      if (space) continue;
      ++chars;
      if (!std::isalpha(static_cast<unsigned char>(c))) ++non_alpha;
    }
    tokens.push_back(static_cast<double>(n));
  }
  if (!tokens.empty()) {
    std::sort(tokens.begin(), tokens.end());
    const std::size_t m = tokens.size() / 2;
    const double median = tokens.size() % 2 ? tokens[m] : 0.5 * (tokens[m - 1] + tokens[m]);
    if (median < rules.min_median_tokens) v.reasons.push_back("short-utterance");
  }
  if (chars > 0 && static_cast<double>(non_alpha) / static_cast<double>(chars) > rules.max_non_alpha_ratio)
    v.reasons.push_back("non-natural-language");
  if (rules.reject_success_without_offer && s.rating && s.rating->success) {
    bool offered = false;
    for (const auto& t : s.turns)
      for (const auto& a : t.turn.system_acts)
        if (a.value && ((a.slot && *a.slot == kNameSlot &&
                         (a.intent == Intent::kRecommend || a.intent == Intent::kInform)) ||
                        a.intent == Intent::kBook))
          offered = true;
    if (!offered) v.reasons.push_back("contradictory-rating");
  }
  v.kept = v.reasons.empty();
  return v;
}

std::vector<QualityVerdict> quality_filter(std::span<const TrialSession* const> sessions,
                                           const QualityRules& rules) {
  std::vector<QualityVerdict> out;
  for (const TrialSession* s : sessions)
    if (s->closed) out.push_back(judge_quality(*s, rules));
  return out;
}

TrialService::TrialService(const Ontology& ontology, std::string checkpoint_dir,
                           std::string store_dir, TrialConfig config)
    : ontology_(&ontology),
      checkpoint_dir_(std::move(checkpoint_dir)),
      store_dir_(std::move(store_dir)),
      config_(config),
      vocab_(ontology),
      parser_(ontology) {
  if (config_.max_turns < 1) throw ConfigError("trial max_turns must be >= 1");
  fs::create_directories(fs::path(store_dir_) / "sessions");
  std::ifstream index(fs::path(store_dir_) / "index.jsonl");
  std::string line;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    replay(j.at("id").get<std::string>());
    ++next_id_;
  }
}

std::vector<std::string> TrialService::checkpoints() const {
  std::vector<std::string> out;
  for (const fs::path& dir : {fs::path(checkpoint_dir_), fs::path(checkpoint_dir_) / "checkpoints"}) {
    if (!fs::is_directory(dir)) continue;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const TrialService::Stack& TrialService::stack(const std::string& checkpoint, Variant variant) const {
  if (checkpoint.empty() || checkpoint.find_first_of("/\\") != std::string::npos ||
      checkpoint.find("..") != std::string::npos)
    throw ValidationError("invalid checkpoint id '" + checkpoint + "'");
  const std::string key = checkpoint + "|" + std::string(name_of(variant));
  std::lock_guard lock(stack_mu_);
  auto it = stacks_.find(key);
  if (it != stacks_.end()) return *it->second;
  fs::path path = fs::path(checkpoint_dir_) / (checkpoint + ".json");
  if (!fs::exists(path)) path = fs::path(checkpoint_dir_) / "checkpoints" / (checkpoint + ".json");
  if (!fs::exists(path)) throw NotFoundError("unknown checkpoint '" + checkpoint + "'");
  PolicyModel model = load_checkpoint(path.string(), vocab_);
  if (variant == Variant::kBaseline) model = model.restricted(false, false);
  auto s = std::make_unique<Stack>(Stack{std::move(model)});
  return *stacks_.emplace(key, std::move(s)).first->second;
}

TrialService::Slot& TrialService::slot(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return *it->second;
}

void TrialService::append(const std::string& id, const Json& event) const {
  const fs::path path = fs::path(store_dir_) / "sessions" / (id + ".jsonl");
  std::ofstream out(path, std::ios::app);
  out << event.dump() << "\n";
  out.flush();
  if (!out) throw std::runtime_error("cannot persist session event to " + path.string());
}

TrialService::Created TrialService::create_session(Variant variant, const std::string& checkpoint,
                                                   std::optional<std::uint64_t> seed) {
  stack(checkpoint, variant);  // validates the checkpoint before anything is persisted
  std::unique_lock lock(mu_);
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_));
  const std::string id = buf;
  auto slot = std::make_unique<Slot>();
  TrialSession& s = slot->session;
  s.id = id;
  s.variant = variant;
  s.checkpoint = checkpoint;
  s.seed = seed ? *seed : derive_seed(config_.seed, next_id_);
  Rng goal_rng(derive_seed(s.seed, kGoalStream));
  s.goal = sample_goal(*ontology_, goal_rng, config_.goals);
  s.goal_text = render_goal_text(s.goal);
  s.state = DialogueState::initial(*ontology_);
  s.erc_rng = Rng(derive_seed(s.seed, kErcStream));
  s.nlg_rng = Rng(derive_seed(s.seed, kNlgStream));

  append(id, Json{{"type", "created"},
                  {"id", id},
                  {"variant", std::string(name_of(variant))},
                  {"checkpoint", checkpoint},
                  {"seed", s.seed},
                  {"goal", s.goal}});
  {
    std::ofstream index(fs::path(store_dir_) / "index.jsonl", std::ios::app);
    index << Json{{"id", id}, {"variant", std::string(name_of(variant))}, {"checkpoint", checkpoint}}.dump()
          << "\n";
    index.flush();
    if (!index) throw std::runtime_error("cannot update session index");
  }
  Created out{id, s.goal_text, s.goal};
  sessions_.emplace(id, std::move(slot));
  ++next_id_;
  return out;
}

TrialService::Reply TrialService::step(TrialSession& s, const std::string& text) const {
  if (s.closed) throw ConflictError("session " + s.id + " is closed");
  const Stack& st = stack(s.checkpoint, s.variant);
  TrialTurn tt;
  Turn& turn = tt.turn;
  turn.index = static_cast<int>(s.turns.size());
  turn.user_utterance = text;
  Reply reply;
  const std::vector<SemanticAct> acts = parser_.parse(text, s.state);

  if (acts.empty()) {
    tt.clarification = true;
    turn.perceived_emotion = s.state.perceived_emotion;
    turn.perceived_confidence = s.state.perceived_confidence;
    turn.system_utterance = kClarification;
    reply.clarification = true;
  } else {
    s.state = track(s.state, acts, *ontology_);
    turn.user_acts = acts;
    const ErcResult er = recognize_emotion(text, s.state.history, s.state, lexicon_,
                                           NoiseChannel::identity(), config_.erc, s.erc_rng);
    s.state.perceived_emotion = er.label;
    s.state.perceived_confidence = er.confidence;
    turn.perceived_emotion = er.label;
    turn.perceived_confidence = er.confidence;
    push_history(s.state, text);
    if (s.state.user_closed) {
      turn.system_acts = {SemanticAct::bye()};
      turn.system_utterance = realize(turn.system_acts, Conduct::kNeutral, bank_, s.nlg_rng);
      s.closed = true;
    } else {
      const NeuralPolicy policy(st.model, *ontology_, DecodeMode::kGreedy);
      Rng unused(0);
      const Decision d = policy.decide(s.state, unused);
      turn.system_acts = d.acts;
      turn.conduct = d.conduct;
      turn.system_utterance = realize(d.acts, d.conduct, bank_, s.nlg_rng);
      apply_system_acts(s.state, d.acts, *ontology_);
      push_history(s.state, turn.system_utterance);
    }
  }
  s.turns.push_back(tt);
  reply.system_text = turn.system_utterance;
  if (!s.closed && static_cast<int>(s.turns.size()) >= config_.max_turns) {
    s.closed = true;
    reply.system_text += " ";
    reply.system_text += kClosing;
    s.turns.back().turn.system_utterance = reply.system_text;
  }
  reply.turn_index = turn.index;
  reply.closed = s.closed;
  return reply;
}

TrialService::Reply TrialService::post_message(const std::string& id, const std::string& text) {
  Slot& sl = slot(id);
  std::lock_guard lock(sl.mu);
  if (sl.session.closed) throw ConflictError("session " + id + " is closed");
  TrialSession next = sl.session;
  const Reply r = step(next, text);
  append(id, Json{{"type", "message"}, {"text", text}, {"system_text", r.system_text}});
  sl.session = std::move(next);
  return r;
}

bool TrialService::submit_rating(const std::string& id, bool success, int sentiment,
                                 const std::string& idempotency_key) {
  if (sentiment < 1 || sentiment > 5)
    throw ValidationError("sentiment must be between 1 and 5, got " + std::to_string(sentiment));
  Slot& sl = slot(id);
  std::lock_guard lock(sl.mu);
  TrialSession& s = sl.session;
  const Rating r{success, sentiment, idempotency_key};
  if (s.rating) {
    if (!idempotency_key.empty() && *s.rating == r) return false;
    throw ConflictError("session " + id + " has already been rated");
  }
  if (s.turns.empty()) throw ConflictError("session " + id + " has no exchanged turn to rate");
  append(id, Json{{"type", "rating"},
                  {"success", success},
                  {"sentiment", sentiment},
                  {"idempotency_key", idempotency_key}});
  s.rating = r;
  s.closed = true;
  return true;
}

void TrialService::replay(const std::string& id) {
  std::ifstream in(fs::path(store_dir_) / "sessions" / (id + ".jsonl"));
  if (!in) throw std::runtime_error("session file missing for " + id);
  auto slot = std::make_unique<Slot>();
  TrialSession& s = slot->session;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json e = Json::parse(line);
    const std::string type = e.at("type");
    if (type == "created") {
      s.id = id;
      s.variant = parse_variant(e.at("variant").get<std::string>());
      s.checkpoint = e.at("checkpoint");
      s.seed = e.at("seed");
      s.goal = e.at("goal").get<UserGoal>();
      s.goal_text = render_goal_text(s.goal);
      s.state = DialogueState::initial(*ontology_);
      s.erc_rng = Rng(derive_seed(s.seed, kErcStream));
      s.nlg_rng = Rng(derive_seed(s.seed, kNlgStream));
    } else if (type == "message") {
      const std::string recorded = e.at("system_text");
      Reply r;
      try {
        r = step(s, e.at("text").get<std::string>());
      } catch (const std::exception& ex) {
        std::cerr << "session " << id << ": replay failed: " << ex.what() << "\n";
        s.quality_flags.push_back("replay-mismatch");
        break;
      }
      if (r.system_text != recorded) {
        s.quality_flags.push_back("replay-mismatch");
        s.turns.back().turn.system_utterance = recorded;
      }
    } else if (type == "rating") {
      s.rating = Rating{e.at("success").get<bool>(), e.at("sentiment").get<int>(),
                        e.value("idempotency_key", std::string())};
      s.closed = true;
    }
  }
  sessions_.emplace(id, std::move(slot));
}

Json TrialService::get_session(const std::string& id) const {
  Slot& sl = slot(id);
  std::lock_guard lock(sl.mu);
  Json j = session_to_json(sl.session);
  j["quality"] = nullptr;
  if (sl.session.closed) {
    const QualityVerdict v = judge_quality(sl.session, config_.quality);
    j["quality"] = {{"kept", v.kept}, {"reasons", v.reasons}};
  }
  return j;
}

std::size_t TrialService::session_count() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

Json TrialService::report() const {
  std::vector<TrialSession> rated;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, sl] : sessions_) {
      std::lock_guard l(sl->mu);
      if (sl->session.rating) rated.push_back(sl->session);
    }
  }
  std::vector<const TrialSession*> ptrs;
  for (const auto& s : rated) ptrs.push_back(&s);
  const auto verdicts = quality_filter(ptrs, config_.quality);

  struct Agg {
    std::size_t rated = 0, kept = 0, success = 0;
    double sentiment = 0.0;
  };
  std::map<std::string, Agg> by_variant;
  Agg all;
  Json rejected = Json::array();
  for (std::size_t i = 0; i < rated.size(); ++i) {
    const TrialSession& s = rated[i];
    Agg& a = by_variant[std::string(name_of(s.variant))];
    ++a.rated;
    ++all.rated;
    if (!verdicts[i].kept) {
      rejected.push_back({{"id", s.id}, {"reasons", verdicts[i].reasons}});
      continue;
    }
    for (Agg* g : {&a, &all}) {
      ++g->kept;
      g->success += s.rating->success ? 1 : 0;
      g->sentiment += s.rating->sentiment;
    }
  }
  auto summary = [](const Agg& a) {
    Json j{{"rated", a.rated}, {"kept", a.kept}};
    if (a.kept > 0) {
      j["success_rate"] = static_cast<double>(a.success) / static_cast<double>(a.kept);
      j["mean_sentiment"] = a.sentiment / static_cast<double>(a.kept);
    } else {
      j["success_rate"] = nullptr;
      j["mean_sentiment"] = nullptr;
    }
    return j;
  };
  Json j{{"overall", summary(all)}, {"variants", Json::object()}, {"rejected", rejected}};
  for (const auto& [name, a] : by_variant) j["variants"][name] = summary(a);
  j["sentiment_scale"] = {"very negative", "negative", "neutral", "positive", "very positive"};
  return j;
}

}  // namespace affectod
