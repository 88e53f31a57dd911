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

#ifndef JUDGETUNE_DATASET_IO_H_
#define JUDGETUNE_DATASET_IO_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "judgetune/backend.h"
#include "judgetune/battle.h"

namespace judgetune {

struct LineError {
  size_t line = 0;  // 1-based
  std::string message;
};

struct LoadResult {
  std::vector<Battle> battles;
  std::vector<LineError> errors;
};

// Reads newline-delimited JSON battle records. Recognized fields: battle_id
// (string or integer), instruction, output_a, output_b, human_label (0, 0.5,
// 1 or null), model_a, model_b. When human_label is absent a `winner` field
// ("model_a", "model_b", "tie", "tie (bothbad)") is mapped to 0 / 1 / 0.5;
// LMSys-style `conversation_a`/`conversation_b` message lists are reduced to
// their first user and assistant turns.
// Strict mode throws DataError naming the first malformed line; lenient mode
// skips malformed lines and reports them in `errors`.
LoadResult LoadBattles(const std::filesystem::path& path, bool strict = true);
LoadResult ParseBattles(std::string_view ndjson, bool strict = true);

// One JSON object per line, fields as accepted by LoadBattles.
std::string BattleToJson(const Battle& battle);
void WriteBattles(const std::filesystem::path& path,
                  const std::vector<Battle>& battles);

struct SplitSpec {
  size_t validation_count = 0;
  size_t test_count = 0;
  uint64_t seed = 0;
};

// Seeded shuffle, then the first validation_count battles form the
// validation set and the next test_count the test set. Throws ConfigError if
// the counts exceed the dataset.
std::pair<std::vector<Battle>, std::vector<Battle>> Split(
    const std::vector<Battle>& battles, const SplitSpec& spec);

struct QualityJudgement {
  std::string battle_id;
  std::set<int> satisfied_criteria;  // subset of 1..7
  int score = 0;                     // |satisfied_criteria|
  bool keep = false;                 // score >= 5 and 1 is satisfied
  bool ratable = true;               // false when no parseable marker
  std::string completion;
};

// The instruction-quality rating prompt followed by the instruction.
std::string RenderQualityPrompt(std::string_view instruction);

// Parses the last `Criteria Satisfied: [...]` marker. nullopt if it is
// missing, malformed, or names a criterion outside 1..7.
std::optional<std::set<int>> ParseCriteriaSatisfied(std::string_view completion);

// Keep rule on a parsed criteria set.
QualityJudgement JudgeQuality(std::string battle_id, std::set<int> criteria);

struct QualityFilterOptions {
  std::string rater_model = "llama-3-8b-instruct";
  double temperature = 0.0;
  int max_retries = 3;
};

// Rates each battle's instruction with `backend`. Judgements whose marker
// stays unparseable after the retries are returned with ratable = false.
std::vector<QualityJudgement> QualityFilter(const std::vector<Battle>& battles,
                                            ChatBackend& backend,
                                            const QualityFilterOptions& options);

std::string QualityJudgementToJson(const QualityJudgement& judgement);

}  // namespace judgetune

#endif  // JUDGETUNE_DATASET_IO_H_
