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

#ifndef JUDGETUNE_ANNOTATION_H_
#define JUDGETUNE_ANNOTATION_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "judgetune/backend.h"
#include "judgetune/battle.h"
#include "judgetune/cost_model.h"
#include "judgetune/rng.h"
#include "judgetune/search_space.h"
#include "judgetune/verdict.h"

namespace judgetune {

enum class AnnotationStatus {
  kOk,
  kParseFailed,
  // Backend kept failing after transport retries. Never persisted.
  kTransportFailed,
};

std::string_view StatusName(AnnotationStatus status);

struct OrderRaw {
  PresentedOrder order = PresentedOrder::kAB;
  std::string completion;
  friend bool operator==(const OrderRaw&, const OrderRaw&) = default;
};

struct Annotation {
  std::string battle_id;
  std::string config_hash;
  // Absent unless status is kOk.
  std::optional<double> preference;
  std::optional<double> discrete;
  int64_t prompt_tokens = 0;
  int64_t completion_tokens = 0;
  double cost = 0.0;
  // Parse-failure resamples summed over the evaluated orders.
  int n_retries = 0;
  std::vector<OrderRaw> per_order_raw;
  AnnotationStatus status = AnnotationStatus::kOk;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// One store record per line, field names:
//   battle_id, config_hash, status ("ok" | "parse_failed"), preference,
//   discrete (null unless ok), prompt_tokens, completion_tokens, cost,
//   n_retries, per_order_raw: [{"order": "AB" | "BA", "completion"}]
std::string AnnotationToJson(const Annotation& annotation);
// Throws DataError on malformed records.
Annotation AnnotationFromJson(std::string_view line);

// Append-only annotation store: `<dir>/<config_hash>.jsonl`, one record per
// (config, battle). The first record for a pair wins; a truncated trailing
// line (interrupted write) is ignored. With an empty directory the store is
// memory-only. Thread-safe; several engines may share one store.
class AnnotationStore {
 public:
  AnnotationStore() = default;
  explicit AnnotationStore(std::filesystem::path dir);

  std::optional<Annotation> Find(const std::string& config_hash,
                                 const std::string& battle_id);
  // Ignores kTransportFailed annotations and already-stored pairs.
  void Append(const Annotation& annotation);
  // All stored annotations of a config, in insertion order.
  std::vector<Annotation> Load(const std::string& config_hash);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct ConfigRecords {
    std::vector<Annotation> items;
    std::map<std::string, size_t> by_battle;
  };
  ConfigRecords& Records(const std::string& config_hash);

  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, ConfigRecords> cache_;
};

struct EngineOptions {
  // Parse-failure resamples per order (so up to max_retries + 1 samples).
  int max_retries = 8;
  double tie_band = kDefaultTieBand;
  int parallelism = 1;
  // Transport retries per sample, with exponential backoff.
  int transport_retries = 4;
  std::chrono::milliseconds backoff_initial{200};
  double backoff_multiplier = 2.0;
};

struct OrderOutcome {
  PresentedOrder order = PresentedOrder::kAB;
  // Preference over the outputs as presented; absent after parse exhaustion.
  std::optional<double> preference;
  std::string completion;
  int64_t prompt_tokens = 0;
  int64_t completion_tokens = 0;
  int retries = 0;
};

// (p_ab + 1 - p_ba) / 2, evaluated so that exchanging the arguments gives
// exactly 1 - result in floating point.
double CombineOrders(double p_ab, double p_ba);

// Order used for a battle when a config does not average orders; a fixed
// function of (battle_id, config_hash).
PresentedOrder SingleOrderFor(const std::string& battle_id,
                              const std::string& config_hash);

class AnnotationEngine {
 public:
  // `space` maps model ids to served names; `store` may be null.
  AnnotationEngine(ChatBackend& backend, SearchSpace space,
                   TokenPriceTable prices, EngineOptions options = {},
                   AnnotationStore* store = nullptr);

  // Fresh annotation (the store is neither read nor written).
  Annotation Annotate(const JudgeConfig& config, const Battle& battle);

  // Annotations in input order. Pairs already in the store are returned from
  // it without backend calls; new ok / parse_failed annotations are appended
  // as they complete. `on_done` (optional) is called once per battle, from
  // worker threads.
  std::vector<Annotation> AnnotateBatch(
      const JudgeConfig& config, std::span<const Battle> battles,
      const std::function<void(size_t)>& on_done = {});

  // One order, with parse resampling. Throws TransportError when transport
  // retries are exhausted.
  OrderOutcome QueryOrder(const JudgeConfig& config, const Battle& battle,
                          PresentedOrder order);

  uint64_t backend_calls() const { return backend_calls_.load(); }
  const EngineOptions& options() const { return options_; }
  const TokenPriceTable& prices() const { return prices_; }

 private:
  ChatResponse CallWithRetry(ChatRequest request);

  ChatBackend& backend_;
  SearchSpace space_;
  TokenPriceTable prices_;
  EngineOptions options_;
  AnnotationStore* store_;
  std::atomic<uint64_t> backend_calls_{0};
};

// Battle with a correct answer as A and a refusal as B; human label 0.
Battle SmokeProbeBattle();

struct SmokeTestResult {
  bool pass = false;
  // Discretized verdicts mapped to the probe's orientation (0 = good answer)
  // for the AB and BA presentations; absent on parse failure.
  std::optional<double> verdict_ab;
  std::optional<double> verdict_ba;
};

// Judges the probe in both explicit orders; passes iff both pick the good
// answer. Transport errors propagate.
SmokeTestResult SmokeTest(AnnotationEngine& engine, const JudgeConfig& config);

enum class BaselineKind { kRandom, kLength };

// length: 0 if output_a is longer, 1 if shorter, 0.5 if equal (bytes).
// random: uniform over {0, 0.5, 1}; `rng` is required.
PreferenceScore BaselineJudge(BaselineKind kind, const Battle& battle,
                              Rng* rng = nullptr);

}  // namespace judgetune

#endif  // JUDGETUNE_ANNOTATION_H_
