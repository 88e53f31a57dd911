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

#include "judgetune/annotation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "judgetune/errors.h"

namespace judgetune {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

AnnotationStatus ParseStatus(std::string_view s) {
  if (s == "ok") return AnnotationStatus::kOk;
  if (s == "parse_failed") return AnnotationStatus::kParseFailed;
  if (s == "transport_failed") return AnnotationStatus::kTransportFailed;
  throw DataError("unknown annotation status: " + std::string(s));
}

}  // namespace

std::string_view StatusName(AnnotationStatus status) {
  switch (status) {
    case AnnotationStatus::kOk:
      return "ok";
    case AnnotationStatus::kParseFailed:
      return "parse_failed";
    case AnnotationStatus::kTransportFailed:
      return "transport_failed";
  }
  return "unknown";
}

std::string AnnotationToJson(const Annotation& a) {
  ordered_json j;
  j["battle_id"] = a.battle_id;
  j["config_hash"] = a.config_hash;
  j["status"] = StatusName(a.status);
  j["preference"] = a.preference ? ordered_json(*a.preference) : ordered_json(nullptr);
  j["discrete"] = a.discrete ? ordered_json(*a.discrete) : ordered_json(nullptr);
  j["prompt_tokens"] = a.prompt_tokens;
  j["completion_tokens"] = a.completion_tokens;
  j["cost"] = a.cost;
  j["n_retries"] = a.n_retries;
  ordered_json raw = ordered_json::array();
  for (const auto& r : a.per_order_raw) {
    raw.push_back({{"order", OrderName(r.order)}, {"completion", r.completion}});
  }
  j["per_order_raw"] = std::move(raw);
  return j.dump();
}

Annotation AnnotationFromJson(std::string_view line) {
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) throw DataError("annotation record is not a JSON object");
  try {
    Annotation a;
    a.battle_id = j.at("battle_id").get<std::string>();
    a.config_hash = j.at("config_hash").get<std::string>();
    a.status = ParseStatus(j.at("status").get<std::string>());
    if (!j.at("preference").is_null()) a.preference = j["preference"].get<double>();
    if (!j.at("discrete").is_null()) a.discrete = j["discrete"].get<double>();
    a.prompt_tokens = j.at("prompt_tokens").get<int64_t>();
    a.completion_tokens = j.at("completion_tokens").get<int64_t>();
    a.cost = j.at("cost").get<double>();
    a.n_retries = j.at("n_retries").get<int>();
    for (const auto& r : j.at("per_order_raw")) {
      const std::string order = r.at("order").get<std::string>();
      if (order != "AB" && order != "BA") throw DataError("bad order " + order);
      a.per_order_raw.push_back(
          {order == "AB" ? PresentedOrder::kAB : PresentedOrder::kBA,
           r.at("completion").get<std::string>()});
    }
    return a;
  } catch (const json::exception& e) {
    throw DataError(std::string("annotation record: ") + e.what());
  }
}

AnnotationStore::AnnotationStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

AnnotationStore::ConfigRecords& AnnotationStore::Records(
    const std::string& config_hash) {
  auto [it, inserted] = cache_.try_emplace(config_hash);
  if (!inserted || dir_.empty()) return it->second;
  std::ifstream in(dir_ / (config_hash + ".jsonl"), std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Annotation a;
    try {
      a = AnnotationFromJson(line);
    } catch (const DataError&) {
      continue;  // interrupted write
    }
    if (a.config_hash != config_hash) continue;
    if (it->second.by_battle.count(a.battle_id)) continue;
    it->second.by_battle.emplace(a.battle_id, it->second.items.size());
    it->second.items.push_back(std::move(a));
  }
  return it->second;
}

std::optional<Annotation> AnnotationStore::Find(const std::string& config_hash,
                                                const std::string& battle_id) {
  std::lock_guard<std::mutex> lock(mu_);
  ConfigRecords& recs = Records(config_hash);
  auto it = recs.by_battle.find(battle_id);
  if (it == recs.by_battle.end()) return std::nullopt;
  return recs.items[it->second];
}

void AnnotationStore::Append(const Annotation& a) {
  if (a.status == AnnotationStatus::kTransportFailed) return;
  std::lock_guard<std::mutex> lock(mu_);
  ConfigRecords& recs = Records(a.config_hash);
  if (recs.by_battle.count(a.battle_id)) return;
  if (!dir_.empty()) {
    const std::filesystem::path path = dir_ / (a.config_hash + ".jsonl");
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (f == nullptr) throw DataError("cannot append to " + path.string());
    const std::string line = AnnotationToJson(a) + "\n";
    const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size();
    std::fclose(f);
    if (!ok) throw DataError("short write to " + path.string());
  }
  recs.by_battle.emplace(a.battle_id, recs.items.size());
  recs.items.push_back(a);
}

std::vector<Annotation> AnnotationStore::Load(const std::string& config_hash) {
  std::lock_guard<std::mutex> lock(mu_);
  return Records(config_hash).items;
}

double CombineOrders(double p_ab, double p_ba) {
  if (p_ab == p_ba) return 0.5;
  // g(x, y) lies in [0.5, 1] for x > y, where 1 - (1 - g) == g is exact.
  auto upper = [](double x, double y) {
    return std::max(0.5, (x + (1.0 - y)) / 2.0);
  };
  if (p_ab > p_ba) return upper(p_ab, p_ba);
  return 1.0 - upper(p_ba, p_ab);
}

PresentedOrder SingleOrderFor(const std::string& battle_id,
                              const std::string& config_hash) {
  const uint64_t h = Mix64(Fnv1a(battle_id) ^ Mix64(Fnv1a(config_hash)));
  return (h & 1) == 0 ? PresentedOrder::kAB : PresentedOrder::kBA;
}

AnnotationEngine::AnnotationEngine(ChatBackend& backend, SearchSpace space,
                                   TokenPriceTable prices,
                                   EngineOptions options,
                                   AnnotationStore* store)
    : backend_(backend),
      space_(std::move(space)),
      prices_(std::move(prices)),
      options_(options),
      store_(store) {
  if (options_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (options_.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (options_.transport_retries < 0) {
    throw ConfigError("transport_retries must be >= 0");
  }
  Discretize(PreferenceScore(0.5), options_.tie_band);  // validates tie_band
}

ChatResponse AnnotationEngine::CallWithRetry(ChatRequest request) {
  auto delay = std::chrono::duration<double, std::milli>(options_.backoff_initial);
  for (int t = 0;; ++t) {
    request.transport_attempt = t;
    try {
      ++backend_calls_;
      return backend_.Complete(request);
    } catch (const TransportError&) {
      if (t >= options_.transport_retries) throw;
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= options_.backoff_multiplier;
  }
}

OrderOutcome AnnotationEngine::QueryOrder(const JudgeConfig& config,
                                          const Battle& battle,
                                          PresentedOrder order) {
  OrderOutcome out;
  out.order = order;
  const bool ab = order == PresentedOrder::kAB;
  ChatRequest req;
  const ModelInfo* model = space_.FindModel(config.model_id);
  req.model = model != nullptr ? model->served_name : config.model_id;
  req.temperature = config.temperature;
  req.prompt = RenderPrompt(config.prompt, battle.instruction,
                            ab ? battle.output_a : battle.output_b,
                            ab ? battle.output_b : battle.output_a);
  req.context = JudgeContext{&config, ConfigHash(config), &battle, order};
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    req.attempt = attempt;
    ChatResponse resp = CallWithRetry(req);
    out.prompt_tokens += resp.prompt_tokens;
    out.completion_tokens += resp.completion_tokens;
    out.completion = std::move(resp.content);
    const ParseResult parsed =
        ParseCompletion(config.prompt.output_type, config.prompt.use_json,
                        out.completion);
    if (const auto* v = std::get_if<Verdict>(&parsed)) {
      out.preference = VerdictToPreference(*v).value();
      out.retries = attempt;
      return out;
    }
  }
  out.retries = options_.max_retries;
  return out;
}

Annotation AnnotationEngine::Annotate(const JudgeConfig& config,
                                      const Battle& battle) {
  Annotation a;
  a.battle_id = battle.battle_id;
  a.config_hash = ConfigHash(config);
  auto add = [&](const OrderOutcome& o) {
    a.prompt_tokens += o.prompt_tokens;
    a.completion_tokens += o.completion_tokens;
    a.n_retries += o.retries;
    a.per_order_raw.push_back({o.order, o.completion});
  };
  std::optional<double> preference;
  try {
    if (config.average_orders) {
      const OrderOutcome ab = QueryOrder(config, battle, PresentedOrder::kAB);
      add(ab);
      const OrderOutcome ba = QueryOrder(config, battle, PresentedOrder::kBA);
      add(ba);
      if (ab.preference && ba.preference) {
        preference = CombineOrders(*ab.preference, *ba.preference);
      }
    } else {
      const PresentedOrder order = SingleOrderFor(a.battle_id, a.config_hash);
      const OrderOutcome o = QueryOrder(config, battle, order);
      add(o);
      if (o.preference) {
        preference = order == PresentedOrder::kAB ? *o.preference
                                                  : 1.0 - *o.preference;
      }
    }
    a.status = preference ? AnnotationStatus::kOk : AnnotationStatus::kParseFailed;
  } catch (const TransportError&) {
    a.status = AnnotationStatus::kTransportFailed;
    preference.reset();
  }
  if (preference) {
    a.preference = *preference;
    a.discrete = Discretize(PreferenceScore(*preference), options_.tie_band);
  }
  a.cost = AnnotationCost(a.prompt_tokens, a.completion_tokens, config.model_id,
                          prices_);
  return a;
}

std::vector<Annotation> AnnotationEngine::AnnotateBatch(
    const JudgeConfig& config, std::span<const Battle> battles,
    const std::function<void(size_t)>& on_done) {
  std::vector<Annotation> results(battles.size());
  std::vector<size_t> pending;
  const std::string hash = ConfigHash(config);
  for (size_t i = 0; i < battles.size(); ++i) {
    std::optional<Annotation> cached;
    if (store_ != nullptr) cached = store_->Find(hash, battles[i].battle_id);
    if (cached) {
      results[i] = std::move(*cached);
      if (on_done) on_done(i);
    } else {
      pending.push_back(i);
    }
  }
  if (pending.empty()) return results;

  std::atomic<size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto work = [&] {
    for (size_t k = next++; k < pending.size(); k = next++) {
      const size_t i = pending[k];
      try {
        Annotation a = Annotate(config, battles[i]);
        if (store_ != nullptr) store_->Append(a);
        results[i] = std::move(a);
        if (on_done) on_done(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = pending.size();
      }
    }
  };
  const size_t n_threads =
      std::min(pending.size(), static_cast<size_t>(options_.parallelism));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

Battle SmokeProbeBattle() {
  Battle b;
  b.battle_id = "smoke-probe";
  b.instruction = "Who is Barack Obama?";
  b.output_a =
      "Barack Obama is an American politician who served as the 44th "
      "president of the United States from 2009 to 2017.";
  b.output_b = "I do not know who Barack Obama is.";
  b.human_label = 0.0;
  return b;
}

SmokeTestResult SmokeTest(AnnotationEngine& engine, const JudgeConfig& config) {
  const Battle probe = SmokeProbeBattle();
  const double band = engine.options().tie_band;
  SmokeTestResult r;
  const OrderOutcome ab = engine.QueryOrder(config, probe, PresentedOrder::kAB);
  const OrderOutcome ba = engine.QueryOrder(config, probe, PresentedOrder::kBA);
  if (ab.preference) r.verdict_ab = Discretize(PreferenceScore(*ab.preference), band);
  if (ba.preference) {
    r.verdict_ba = 1.0 - Discretize(PreferenceScore(*ba.preference), band);
  }
  r.pass = r.verdict_ab == 0.0 && r.verdict_ba == 0.0;
  return r;
}

PreferenceScore BaselineJudge(BaselineKind kind, const Battle& battle, Rng* rng) {
  if (kind == BaselineKind::kLength) {
    const size_t a = battle.output_a.size();
    const size_t b = battle.output_b.size();
    if (a == b) return PreferenceScore(0.5);
    return PreferenceScore(a > b ? 0.0 : 1.0);
  }
  if (rng == nullptr) {
    throw std::invalid_argument("random baseline needs a seeded generator");
  }
  static constexpr double kValues[] = {0.0, 0.5, 1.0};
  return PreferenceScore(kValues[rng->UniformIndex(3)]);
}

}  // namespace judgetune
