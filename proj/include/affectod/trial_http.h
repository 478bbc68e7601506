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

#ifndef AFFECTOD_TRIAL_HTTP_H_
#define AFFECTOD_TRIAL_HTTP_H_

#include <string>

#include "affectod/trial.h"

namespace httplib {
class Server;
}

namespace affectod {

struct HttpOptions {
  std::string cors_origin = "*";
  std::string token;       // when set, X-Trial-Token must match
  std::string static_dir;  // optional UI assets served at /
};

// POST /sessions, POST /sessions/{id}/messages, POST /sessions/{id}/rating,
// GET /sessions/{id}, GET /report, GET /checkpoints. Errors come back as
// {"error": message} with 400, 401, 404 or 409.
void mount_trial_routes(httplib::Server& server, TrialService& service,
                        const HttpOptions& options = {});

}  // namespace affectod

#endif  // AFFECTOD_TRIAL_HTTP_H_
