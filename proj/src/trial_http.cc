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

#include "affectod/trial_http.h"

#include <httplib.h>

#include "affectod/errors.h"

namespace affectod {
namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Json body_of(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    Json j = Json::parse(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
  }
}

bool parse_success(const Json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v;
    if (s == "yes" || s == "Yes" || s == "true") return true;
    if (s == "no" || s == "No" || s == "false") return false;
  }
  throw ValidationError("success must be true/false or yes/no");
}

}  // namespace

void mount_trial_routes(httplib::Server& server, TrialService& service, const HttpOptions& options) {
  const HttpOptions opts = options;
  server.set_default_headers({{"Access-Control-Allow-Origin", opts.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type, X-Trial-Token, Idempotency-Key"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto guarded = [opts](auto handler) {
    return [opts, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        if (!opts.token.empty() && req.get_header_value("X-Trial-Token") != opts.token) {
          send_json(res, 401, {{"error", "missing or wrong trial token"}});
          return;
        }
        handler(req, res);
      } catch (const ValidationError& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const Json::exception& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
      } catch (const ConflictError& e) {
        send_json(res, 409, {{"error", e.what()}});
      } catch (const SessionClosedError& e) {
        send_json(res, 409, {{"error", e.what()}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
      }
    };
  };

  server.Post("/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const Json b = body_of(req);
    const Variant v = parse_variant(b.value("variant", std::string("emotional")));
    const std::string ckpt = b.value("checkpoint", std::string("best"));
    std::optional<std::uint64_t> seed;
    if (b.contains("seed") && !b["seed"].is_null()) seed = b["seed"].get<std::uint64_t>();
    const auto c = service.create_session(v, ckpt, seed);
    send_json(res, 201, {{"session_id", c.id}, {"goal_text", c.goal_text}, {"goal", c.goal},
                         {"variant", std::string(name_of(v))}, {"checkpoint", ckpt}});
  }));

  server.Post(R"(/sessions/([^/]+)/messages)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const Json b = body_of(req);
                if (!b.contains("text") || !b["text"].is_string())
                  throw ValidationError("body needs a 'text' string");
                const auto r = service.post_message(req.matches[1], b["text"].get<std::string>());
                send_json(res, 200, {{"system_text", r.system_text}, {"turn_index", r.turn_index},
                                     {"closed", r.closed}, {"clarification", r.clarification}});
              }));

  server.Post(R"(/sessions/([^/]+)/rating)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const Json b = body_of(req);
                if (!b.contains("success") || !b.contains("sentiment"))
                  throw ValidationError("body needs 'success' and 'sentiment'");
                if (!b["sentiment"].is_number_integer())
                  throw ValidationError("sentiment must be an integer 1-5");
                std::string key = req.get_header_value("Idempotency-Key");
                if (b.contains("idempotency_key")) {
                  if (!b["idempotency_key"].is_string())
                    throw ValidationError("idempotency_key must be a string");
                  key = b["idempotency_key"].get<std::string>();
                }
                const bool stored = service.submit_rating(
                    req.matches[1], parse_success(b["success"]), b["sentiment"].get<int>(), key);
                send_json(res, 200, {{"stored", stored}, {"closed", true}});
              }));

  server.Get(R"(/sessions/([^/]+))", guarded([&service](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, service.get_session(req.matches[1]));
             }));

  server.Get("/report", guarded([&service](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, service.report());
             }));

  server.Get("/checkpoints", guarded([&service](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, {{"checkpoints", service.checkpoints()}});
             }));

  if (!opts.static_dir.empty()) server.set_mount_point("/", opts.static_dir);
}

}  // namespace affectod
