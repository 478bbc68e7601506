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

#ifndef AFFECTOD_ERRORS_H_
#define AFFECTOD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace affectod {

// Malformed configuration, ontology, distribution or schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A user act references a domain or slot the ontology does not know.
// The tracker leaves the state untouched when it throws this.
class TrackingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No template covers an act.
class RealizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The simulated user already said goodbye.
class SessionClosedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric is undefined for the given input (no turns, too few samples, ...).
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during an optimisation step.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-vocabulary input data (corpora, episode files).
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer annotations than the aggregation rule needs.
class AnnotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace affectod

#endif  // AFFECTOD_ERRORS_H_
