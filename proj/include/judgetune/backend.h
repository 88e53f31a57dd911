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

#ifndef JUDGETUNE_BACKEND_H_
#define JUDGETUNE_BACKEND_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "judgetune/battle.h"
#include "judgetune/search_space.h"

namespace judgetune {

// Order in which a battle's outputs are shown to the judge.
enum class PresentedOrder { kAB, kBA };

std::string_view OrderName(PresentedOrder order);

// What a judging request is about. Network backends ignore it; simulated and
// replay backends answer from it.
struct JudgeContext {
  const JudgeConfig* config = nullptr;
  std::string config_hash;
  const Battle* battle = nullptr;
  PresentedOrder order = PresentedOrder::kAB;
};

struct QualityContext {
  std::string item_id;
};

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  // Resample index after parse failures (0 for the first sample).
  int attempt = 0;
  // Retry index after transport failures of this same sample.
  int transport_attempt = 0;
  std::variant<std::monostate, JudgeContext, QualityContext> context;
};

struct ChatResponse {
  std::string content;
  int64_t prompt_tokens = 0;
  int64_t completion_tokens = 0;
};

// Implementations must be safe to call concurrently.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Throws TransportError when the backend cannot produce a completion.
  virtual ChatResponse Complete(const ChatRequest& request) = 0;
};

// Chat-completions HTTP endpoint: POST {base_url}/chat/completions with
// {"model", "messages": [{"role": "user", "content"}], "temperature"}; reads
// choices[0].message.content and usage.{prompt,completion}_tokens.
struct HttpEndpointParams {
  std::string base_url;
  // Name of the environment variable holding the bearer token; empty for
  // unauthenticated servers.
  std::string api_key_env;
  double timeout_s = 120.0;
  int max_parallel = 8;
  // Omitted from the request when 0.
  int max_tokens = 0;
};

enum class SimPolicy {
  kOracle,        // reproduces the human label
  kPositionBias,  // prefers the first position on a `bias_rate` fraction
  kAlwaysTie,
  kLength,        // prefers the longer output
  kContentHash,   // deterministic pseudo-random function of the shown texts
  kPlanted,       // per-config accuracy against the human label
  kGarbage,       // never emits a parseable verdict
};

std::string_view SimPolicyName(SimPolicy policy);
SimPolicy ParseSimPolicy(std::string_view name);

struct PlantedJudge {
  double accuracy = 0.5;
  int64_t prompt_tokens = 0;
  int64_t completion_tokens = 0;
};

struct SimulationParams {
  SimPolicy policy = SimPolicy::kOracle;
  uint64_t noise_seed = 0;
  // kPositionBias: fraction of battles (chosen by hash) judged by position.
  double bias_rate = 1.0;
  // kPlanted: explicit judges by config hash; other configs draw accuracy
  // uniformly from [accuracy_min, accuracy_max] by hash.
  std::map<std::string, PlantedJudge> planted;
  double accuracy_min = 0.3;
  double accuracy_max = 0.5;
  // kPlanted: std of the per-(config, battle) perturbation of accuracy.
  double noise_sigma = 0.0;
  // When set, unplanted configs report per-call token counts drawn by hash
  // from this range (prompt and completion alike); otherwise counts derive
  // from text length (4 characters per token).
  std::optional<std::pair<int64_t, int64_t>> token_range;
  // The first `invalid_attempts` samples of every query are unparseable.
  int invalid_attempts = 0;
  // The first `transport_failures` tries of every sample throw.
  int transport_failures = 0;
};

struct ReplayParams {
  std::filesystem::path path;
};

// Exactly one kind's parameters, by construction.
struct BackendSpec {
  std::variant<HttpEndpointParams, SimulationParams, ReplayParams> params;
};

std::unique_ptr<ChatBackend> MakeBackend(const BackendSpec& spec);

class SimulatedBackend : public ChatBackend {
 public:
  explicit SimulatedBackend(SimulationParams params);
  ChatResponse Complete(const ChatRequest& request) override;

  // Preference the simulated judge holds for the battle as presented; used
  // by tests as the planted function. nullopt for kGarbage.
  std::optional<double> PlantedPreference(const JudgeContext& context) const;
  // Accuracy of the planted judge for a config hash.
  double PlantedAccuracy(const std::string& config_hash) const;

 private:
  SimulationParams params_;
};

// Serves completions from newline-delimited records:
//   {"battle_id", "order"?: "AB"|"BA", "config_hash"?, "completion"?,
//    "preference"?, "prompt_tokens"?, "completion_tokens"?}
// Lookup prefers (config_hash, battle_id, order), then (battle_id, order),
// then (battle_id). A record carrying "preference" instead of "completion"
// is rendered in the requested output format; a preference stated for order
// AB is mirrored (1 - p) when the battle is shown BA. A missing record is a
// TransportError.
class ReplayBackend : public ChatBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& path);
  ChatResponse Complete(const ChatRequest& request) override;
  size_t size() const { return records_.size(); }

 private:
  struct Record {
    std::optional<std::string> completion;
    std::optional<double> preference;
    bool has_order = false;
    PresentedOrder order = PresentedOrder::kAB;
    int64_t prompt_tokens = 0;
    int64_t completion_tokens = 0;
  };
  std::map<std::string, Record> records_;
};

class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpEndpointParams params);
  ~HttpChatBackend() override;
  ChatResponse Complete(const ChatRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace judgetune

#endif  // JUDGETUNE_BACKEND_H_
