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

#include "judgetune/backend.h"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "judgetune/errors.h"
#include "judgetune/rng.h"
#include "judgetune/verdict.h"

namespace judgetune {
namespace {

using json = nlohmann::json;

constexpr std::string_view kUnparseable =
    "Both answers have merits and I cannot decide which one is better.";

int64_t ApproxTokens(std::string_view text) {
  return static_cast<int64_t>((text.size() + 3) / 4);
}

uint64_t BattleKey(uint64_t seed, const std::string& battle_id) {
  return Mix64(seed ^ Fnv1a(battle_id));
}

uint64_t PairKey(uint64_t seed, const std::string& config_hash,
                 const std::string& battle_id) {
  return Mix64(Mix64(seed ^ Fnv1a(config_hash)) ^ Fnv1a(battle_id));
}

double HashNormal(uint64_t key) {
  double u1 = HashToUnit(Mix64(key));
  const double u2 = HashToUnit(Mix64(key ^ 0x5bd1e995ULL));
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Label oriented to the presented order.
std::optional<double> ShownLabel(const JudgeContext& ctx) {
  if (!ctx.battle->human_label) return std::nullopt;
  const double label = *ctx.battle->human_label;
  return ctx.order == PresentedOrder::kAB ? label : 1.0 - label;
}

std::string RenderFor(const JudgeConfig& config, double p) {
  Verdict v = VerdictForPreference(config.prompt.output_type, p);
  if (config.prompt.provide_answer) v.answer = "Here is my own answer.";
  if (config.prompt.provide_explanation) {
    v.explanation = "One answer follows the instruction more closely.";
  }
  std::string body = RenderCompletion(v, config.prompt.use_json);
  if (config.prompt.use_json) return "```json\n" + body + "\n```";
  return body;
}

}  // namespace

std::string_view OrderName(PresentedOrder order) {
  return order == PresentedOrder::kAB ? "AB" : "BA";
}

std::string_view SimPolicyName(SimPolicy policy) {
  switch (policy) {
    case SimPolicy::kOracle:
      return "oracle";
    case SimPolicy::kPositionBias:
      return "position_bias";
    case SimPolicy::kAlwaysTie:
      return "always_tie";
    case SimPolicy::kLength:
      return "length";
    case SimPolicy::kContentHash:
      return "content_hash";
    case SimPolicy::kPlanted:
      return "planted";
    case SimPolicy::kGarbage:
      return "garbage";
  }
  return "unknown";
}

SimPolicy ParseSimPolicy(std::string_view name) {
  for (SimPolicy p : {SimPolicy::kOracle, SimPolicy::kPositionBias,
                      SimPolicy::kAlwaysTie, SimPolicy::kLength,
                      SimPolicy::kContentHash, SimPolicy::kPlanted,
                      SimPolicy::kGarbage}) {
    if (SimPolicyName(p) == name) return p;
  }
  throw ConfigError("unknown simulation policy: " + std::string(name));
}

SimulatedBackend::SimulatedBackend(SimulationParams params)
    : params_(std::move(params)) {
  if (params_.accuracy_min > params_.accuracy_max) {
    throw ConfigError("simulation: accuracy_min > accuracy_max");
  }
  if (params_.token_range &&
      (params_.token_range->first < 0 ||
       params_.token_range->first > params_.token_range->second)) {
    throw ConfigError("simulation: invalid token_range");
  }
}

double SimulatedBackend::PlantedAccuracy(const std::string& config_hash) const {
  if (auto it = params_.planted.find(config_hash); it != params_.planted.end()) {
    return it->second.accuracy;
  }
  const double u = HashToUnit(Mix64(params_.noise_seed ^ Fnv1a(config_hash)));
  return params_.accuracy_min + u * (params_.accuracy_max - params_.accuracy_min);
}

std::optional<double> SimulatedBackend::PlantedPreference(
    const JudgeContext& ctx) const {
  const Battle& b = *ctx.battle;
  const bool ab = ctx.order == PresentedOrder::kAB;
  const std::string& shown_a = ab ? b.output_a : b.output_b;
  const std::string& shown_b = ab ? b.output_b : b.output_a;
  switch (params_.policy) {
    case SimPolicy::kOracle:
      return ShownLabel(ctx).value_or(0.5);
    case SimPolicy::kPositionBias: {
      const double u = HashToUnit(BattleKey(params_.noise_seed, b.battle_id));
      if (u < params_.bias_rate) return 0.0;
      return ShownLabel(ctx).value_or(0.5);
    }
    case SimPolicy::kAlwaysTie:
      return 0.5;
    case SimPolicy::kLength:
      if (shown_a.size() == shown_b.size()) return 0.5;
      return shown_a.size() > shown_b.size() ? 0.0 : 1.0;
    case SimPolicy::kContentHash: {
      const uint64_t h =
          Fnv1a(shown_b, Fnv1a("\x1f", Fnv1a(shown_a))) ^ Mix64(params_.noise_seed);
      return HashToUnit(Mix64(h));
    }
    case SimPolicy::kPlanted: {
      if (!b.human_label) return 0.5;
      const double accuracy = PlantedAccuracy(ctx.config_hash);
      const uint64_t pair = PairKey(params_.noise_seed, ctx.config_hash, b.battle_id);
      const double difficulty = HashToUnit(BattleKey(params_.noise_seed, b.battle_id));
      const double threshold = accuracy + params_.noise_sigma * HashNormal(pair);
      double verdict = *b.human_label;
      if (!(difficulty < threshold)) {
        // Wrong answer, identical for both presentations of the battle.
        const bool first = (Mix64(pair ^ 0x7f4a7c15ULL) & 1) == 0;
        if (verdict == 0.0) {
          verdict = first ? 0.5 : 1.0;
        } else if (verdict == 1.0) {
          verdict = first ? 0.0 : 0.5;
        } else {
          verdict = first ? 0.0 : 1.0;
        }
      }
      return ab ? verdict : 1.0 - verdict;
    }
    case SimPolicy::kGarbage:
      return std::nullopt;
  }
  return std::nullopt;
}

ChatResponse SimulatedBackend::Complete(const ChatRequest& request) {
  if (request.transport_attempt < params_.transport_failures) {
    throw TransportError("simulated transport failure");
  }
  ChatResponse resp;
  if (const auto* q = std::get_if<QualityContext>(&request.context)) {
    std::string list;
    const uint64_t key = BattleKey(params_.noise_seed, q->item_id);
    for (int c = 1; c <= 7; ++c) {
      if (HashToUnit(Mix64(key + static_cast<uint64_t>(c))) < 0.6) {
        if (!list.empty()) list += ", ";
        list += std::to_string(c);
      }
    }
    resp.content = "Each criterion was checked.\nCriteria Satisfied: [" + list + "]";
    resp.prompt_tokens = ApproxTokens(request.prompt);
    resp.completion_tokens = ApproxTokens(resp.content);
    return resp;
  }
  const auto* ctx = std::get_if<JudgeContext>(&request.context);
  if (ctx == nullptr || ctx->config == nullptr || ctx->battle == nullptr) {
    resp.content = std::string(kUnparseable);
  } else if (request.attempt < params_.invalid_attempts) {
    resp.content = std::string(kUnparseable);
  } else if (auto p = PlantedPreference(*ctx)) {
    resp.content = RenderFor(*ctx->config, *p);
  } else {
    resp.content = std::string(kUnparseable);
  }

  if (ctx != nullptr) {
    if (auto it = params_.planted.find(ctx->config_hash);
        it != params_.planted.end() && it->second.prompt_tokens > 0) {
      resp.prompt_tokens = it->second.prompt_tokens;
      resp.completion_tokens = it->second.completion_tokens;
      return resp;
    }
    if (params_.token_range) {
      const auto [lo, hi] = *params_.token_range;
      const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
      const uint64_t h = Mix64(params_.noise_seed ^ Fnv1a(ctx->config_hash) ^ 0x70c3ULL);
      resp.prompt_tokens = lo + static_cast<int64_t>(h % span);
      resp.completion_tokens = lo + static_cast<int64_t>(Mix64(h) % span);
      return resp;
    }
  }
  resp.prompt_tokens = ApproxTokens(request.prompt);
  resp.completion_tokens = ApproxTokens(resp.content);
  return resp;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open replay source " + path.string());
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    auto bad = [&](const std::string& why) {
      return DataError(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    if (!j.is_object() || !j.contains("battle_id")) throw bad("expected an object with battle_id");
    std::string battle_id = j["battle_id"].is_string()
                                ? j["battle_id"].get<std::string>()
                                : j["battle_id"].dump();
    Record r;
    if (j.contains("completion") && j["completion"].is_string()) {
      r.completion = j["completion"].get<std::string>();
    } else if (j.contains("preference") && j["preference"].is_number()) {
      r.preference = j["preference"].get<double>();
      if (!(*r.preference >= 0.0 && *r.preference <= 1.0)) throw bad("preference outside [0, 1]");
    } else {
      throw bad("record needs a completion or a preference");
    }
    if (j.contains("order") && j["order"].is_string()) {
      const std::string order = j["order"].get<std::string>();
      if (order != "AB" && order != "BA") throw bad("order must be AB or BA");
      r.has_order = true;
      r.order = order == "AB" ? PresentedOrder::kAB : PresentedOrder::kBA;
    }
    r.prompt_tokens = j.value("prompt_tokens", int64_t{0});
    r.completion_tokens = j.value("completion_tokens", int64_t{0});
    std::string key;
    if (j.contains("config_hash") && j["config_hash"].is_string()) {
      key = "c|" + j["config_hash"].get<std::string>() + "|" + battle_id + "|" +
            std::string(OrderName(r.order));
    } else if (r.has_order) {
      key = "b|" + battle_id + "|" + std::string(OrderName(r.order));
    } else {
      key = "i|" + battle_id;
    }
    records_.emplace(std::move(key), std::move(r));
  }
}

ChatResponse ReplayBackend::Complete(const ChatRequest& request) {
  const auto* ctx = std::get_if<JudgeContext>(&request.context);
  if (ctx == nullptr || ctx->battle == nullptr || ctx->config == nullptr) {
    throw TransportError("replay backend only serves judge requests");
  }
  const std::string& id = ctx->battle->battle_id;
  const std::string order(OrderName(ctx->order));
  const Record* rec = nullptr;
  for (const std::string& key : {"c|" + ctx->config_hash + "|" + id + "|" + order,
                                 "b|" + id + "|" + order, "i|" + id}) {
    if (auto it = records_.find(key); it != records_.end()) {
      rec = &it->second;
      break;
    }
  }
  if (rec == nullptr) {
    throw TransportError("replay: no record for battle " + id + " order " + order);
  }
  ChatResponse resp;
  if (rec->completion) {
    resp.content = *rec->completion;
  } else {
    double p = *rec->preference;
    if (!rec->has_order && ctx->order == PresentedOrder::kBA) p = 1.0 - p;
    resp.content = RenderFor(*ctx->config, p);
  }
  resp.prompt_tokens = rec->prompt_tokens > 0 ? rec->prompt_tokens : ApproxTokens(request.prompt);
  resp.completion_tokens =
      rec->completion_tokens > 0 ? rec->completion_tokens : ApproxTokens(resp.content);
  return resp;
}

std::unique_ptr<ChatBackend> MakeBackend(const BackendSpec& spec) {
  return std::visit(
      [](const auto& p) -> std::unique_ptr<ChatBackend> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HttpEndpointParams>) {
          return std::make_unique<HttpChatBackend>(p);
        } else if constexpr (std::is_same_v<T, SimulationParams>) {
          return std::make_unique<SimulatedBackend>(p);
        } else {
          return std::make_unique<ReplayBackend>(p.path);
        }
      },
      spec.params);
}

}  // namespace judgetune
