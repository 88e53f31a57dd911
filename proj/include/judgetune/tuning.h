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

#ifndef JUDGETUNE_TUNING_H_
#define JUDGETUNE_TUNING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "judgetune/annotation.h"
#include "judgetune/battle.h"
#include "judgetune/search_space.h"

namespace judgetune {

struct Rung {
  size_t survivor_count = 0;
  size_t instruction_count = 0;
  friend bool operator==(const Rung&, const Rung&) = default;
};

// Synchronous successive-halving schedule: rung r evaluates survivor_count
// configs on instruction_count battles.
struct RungPlan {
  std::vector<Rung> rungs;

  // (4480, 400), (1200, 1200), (400, 3548).
  static RungPlan Default();

  // Throws ConfigError unless nonempty with survivor counts strictly
  // decreasing and instruction counts strictly increasing, all positive.
  void Validate() const;

  // Sum of survivor_count x instruction_count (no reuse across rungs).
  uint64_t PlannedAnnotations() const;
  // Sum of survivor_count x (instruction_count - previous instruction_count),
  // the cost when nested subsamples reuse earlier annotations.
  uint64_t IncrementalAnnotations() const;

  friend bool operator==(const RungPlan&, const RungPlan&) = default;
};

struct ConfigResult {
  std::string config_hash;
  // Mean agreement over ok annotations; absent when none parsed.
  std::optional<double> agreement;
  // Mean cost over ok and parse_failed annotations.
  double cost_per_annotation = 0.0;
  size_t n_used = 0;
  size_t n_parse_failed = 0;
  size_t n_transport_failed = 0;
  // Non-dominated layer; absent for configs ranked last for lack of data.
  std::optional<size_t> layer;
  size_t rank = 0;
};

struct RungState {
  size_t instruction_count = 0;
  // In the order the configs entered the rung.
  std::vector<ConfigResult> evaluated;
  // Config hashes, best first.
  std::vector<std::string> ranking;
  // Configs promoted to the next rung (empty after the last rung).
  std::vector<std::string> survivors;
  std::vector<std::string> pareto_front;
};

struct TuningState {
  uint64_t seed = 0;
  RungPlan plan;
  std::vector<JudgeConfig> candidates;
  // Battle ids in subsample order; rung r uses the first instruction_count.
  std::vector<std::string> subsample;
  std::string battle_digest;
  std::vector<RungState> rungs;

  bool complete() const { return rungs.size() == plan.rungs.size(); }
  const JudgeConfig* FindConfig(const std::string& config_hash) const;
};

// Checkpoint: pretty-printed JSON with keys format, seed, plan, battle_digest,
// candidates, subsample, rungs, annotation_counts. Byte-identical for equal
// states.
std::string SerializeState(const TuningState& state);
// Throws DataError on a corrupted or unrecognized checkpoint.
TuningState DeserializeState(std::string_view text);
void WriteCheckpoint(const std::filesystem::path& path,
                     const TuningState& state);
TuningState ReadCheckpoint(const std::filesystem::path& path);

// Digest of the battle pool (ids, texts, labels) used to detect that a
// checkpoint belongs to different data.
std::string BattleDigest(std::span<const Battle> battles);

// Candidate set for a plan: the whole space when the first survivor count
// equals its size, otherwise a seeded sample of that many configs kept in
// enumeration order. Throws ConfigError if the plan asks for more.
std::vector<JudgeConfig> SelectCandidates(const std::vector<JudgeConfig>& space,
                                          const RungPlan& plan, uint64_t seed);

struct TuningOptions {
  // Written after every rung; an existing file is resumed from.
  std::optional<std::filesystem::path> checkpoint;
  // Return after this many completed rungs (simulates an interruption).
  std::optional<size_t> stop_after_rungs;
  std::function<void(size_t rung, size_t done, size_t total)> on_progress;
};

// Evaluates each rung's configs on the nested battle subsample, ranks them
// by non-dominated sort over (agreement, cost per annotation) and keeps the
// next rung's survivor count. Battles must all carry human labels and number
// at least the last rung's instruction count.
TuningState RunSuccessiveHalving(const std::vector<JudgeConfig>& candidates,
                                 const RungPlan& plan,
                                 std::span<const Battle> battles,
                                 AnnotationEngine& engine, uint64_t seed,
                                 const TuningOptions& options = {});

// Objectives of one config on a set of annotations.
ConfigResult SummarizeAnnotations(const std::string& config_hash,
                                  std::span<const Annotation> annotations,
                                  std::span<const Battle> battles);

// Ranks results in place (layer, rank) and returns hashes best first.
std::vector<std::string> RankResults(std::vector<ConfigResult>& results);

}  // namespace judgetune

#endif  // JUDGETUNE_TUNING_H_
