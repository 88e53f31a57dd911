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

#ifndef JUDGETUNE_CLI_H_
#define JUDGETUNE_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "judgetune/backend.h"
#include "judgetune/tuning.h"

namespace judgetune {

// Run configuration (YAML). Relative paths resolve against the file's
// directory.
//
//   seed: 7
//   search_space: space.yaml        # optional; the default space otherwise
//   rung_plan: [[90, 20], [30, 60], [10, 180]]
//   battles: validation.jsonl
//   test_battles: test.jsonl
//   golden_scores: golden.jsonl     # optional
//   price_table: prices.csv         # optional; built-in prices otherwise
//   output_dir: runs/mini
//   parallelism: 4
//   max_retries: 8
//   tie_band: 0.05
//   backend:
//     kind: simulated               # simulated | http_endpoint | replay
//     policy: planted
//     ...
struct RunConfig {
  std::optional<uint64_t> seed;
  std::optional<std::filesystem::path> search_space;
  RungPlan rung_plan = RungPlan::Default();
  std::optional<BackendSpec> backend;
  std::optional<std::filesystem::path> battles;
  std::optional<std::filesystem::path> test_battles;
  std::optional<std::filesystem::path> golden_scores;
  std::optional<std::filesystem::path> price_table;
  std::filesystem::path output_dir = "judgetune-run";
  int parallelism = 1;
  int max_retries = 8;
  double tie_band = 0.05;
};

// Throws ConfigError on a missing or malformed file, or when a referenced
// path does not exist.
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Backend section of a run config, parsed from YAML text.
BackendSpec ParseBackendSpec(const std::string& yaml,
                             const std::filesystem::path& base_dir = {});

// Entry point of the `judgetune` tool. Exit codes: 0 success, 1 runtime
// failure, 2 configuration error.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace judgetune

#endif  // JUDGETUNE_CLI_H_
