// Copyright 2026 The judgetune Authors.
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

#ifndef JUDGETUNE_ERRORS_H_
#define JUDGETUNE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace judgetune {

// Invalid user-supplied configuration: empty registries, bad tie bands,
// malformed config files. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric is not defined for the given input (no usable samples, constant
// rank vectors, zero mean for a coefficient of variation).
class UndefinedMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backend unreachable, timed out, or returned a non-success HTTP status.
// Retryable; distinct from a completion that fails to parse.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (battles, checkpoints, price tables, stores).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace judgetune

#endif  // JUDGETUNE_ERRORS_H_
