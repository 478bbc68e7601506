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

#ifndef AFFECTOD_TESTS_SUPPORT_H_
#define AFFECTOD_TESTS_SUPPORT_H_

#include <fstream>
#include <string>
#include <vector>

#include "affectod/act.h"
#include "affectod/ontology.h"

namespace affectod::testing {

inline std::string fixture(const std::string& name) {
  return std::string(AFFECTOD_FIXTURES_DIR) + "/" + name;
}

inline Json load_fixture(const std::string& name) { return read_json_file(fixture(name)); }

inline const Ontology& desk() {
  static const Ontology o = desk_ontology();
  return o;
}

}  // namespace affectod::testing

#endif  // AFFECTOD_TESTS_SUPPORT_H_
