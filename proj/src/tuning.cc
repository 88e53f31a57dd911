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

#include "judgetune/tuning.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "judgetune/errors.h"
#include "judgetune/moo.h"
#include "judgetune/rng.h"

namespace judgetune {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kCheckpointFormat = "judgetune-checkpoint-v1";
constexpr uint64_t kSubsampleStream = 0x5b5a5b5a00000001ULL;
constexpr uint64_t kCandidateStream = 0x5b5a5b5a00000002ULL;

std::string Hex16(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ordered_json ResultToJson(const ConfigResult& r) {
  ordered_json j;
  j["config_hash"] = r.config_hash;
  j["agreement"] = r.agreement ? ordered_json(*r.agreement) : ordered_json(nullptr);
  j["cost_per_annotation"] = r.cost_per_annotation;
  j["n_used"] = r.n_used;
  j["n_parse_failed"] = r.n_parse_failed;
  j["n_transport_failed"] = r.n_transport_failed;
  j["layer"] = r.layer ? ordered_json(*r.layer) : ordered_json(nullptr);
  j["rank"] = r.rank;
  return j;
}

ConfigResult ResultFromJson(const ordered_json& j) {
  ConfigResult r;
  r.config_hash = j.at("config_hash").get<std::string>();
  if (!j.at("agreement").is_null()) r.agreement = j["agreement"].get<double>();
  r.cost_per_annotation = j.at("cost_per_annotation").get<double>();
  r.n_used = j.at("n_used").get<size_t>();
  r.n_parse_failed = j.at("n_parse_failed").get<size_t>();
  r.n_transport_failed = j.at("n_transport_failed").get<size_t>();
  if (!j.at("layer").is_null()) r.layer = j["layer"].get<size_t>();
  r.rank = j.at("rank").get<size_t>();
  return r;
}

}  // namespace

RungPlan RungPlan::Default() {
  return {{{4480, 400}, {1200, 1200}, {400, 3548}}};
}

void RungPlan::Validate() const {
  if (rungs.empty()) throw ConfigError("rung plan is empty");
  for (size_t r = 0; r < rungs.size(); ++r) {
    if (rungs[r].survivor_count == 0 || rungs[r].instruction_count == 0) {
      throw ConfigError("rung plan counts must be positive");
    }
    if (r == 0) continue;
    if (rungs[r].survivor_count >= rungs[r - 1].survivor_count) {
      throw ConfigError("rung survivor counts must strictly decrease");
    }
    if (rungs[r].instruction_count <= rungs[r - 1].instruction_count) {
      throw ConfigError("rung instruction counts must strictly increase");
    }
  }
}

uint64_t RungPlan::PlannedAnnotations() const {
  uint64_t total = 0;
  for (const auto& r : rungs) total += uint64_t{r.survivor_count} * r.instruction_count;
  return total;
}

uint64_t RungPlan::IncrementalAnnotations() const {
  uint64_t total = 0;
  size_t previous = 0;
  for (const auto& r : rungs) {
    total += uint64_t{r.survivor_count} * (r.instruction_count - previous);
    previous = r.instruction_count;
  }
  return total;
}

const JudgeConfig* TuningState::FindConfig(const std::string& config_hash) const {
  for (const auto& c : candidates) {
    if (ConfigHash(c) == config_hash) return &c;
  }
  return nullptr;
}

std::string SerializeState(const TuningState& state) {
  ordered_json j;
  j["format"] = kCheckpointFormat;
  j["seed"] = state.seed;
  ordered_json plan = ordered_json::array();
  for (const auto& r : state.plan.rungs) {
    plan.push_back({{"survivor_count", r.survivor_count},
                    {"instruction_count", r.instruction_count}});
  }
  j["plan"] = std::move(plan);
  j["battle_digest"] = state.battle_digest;
  ordered_json candidates = ordered_json::array();
  for (const auto& c : state.candidates) {
    candidates.push_back(ordered_json::parse(CanonicalJson(c)));
  }
  j["candidates"] = std::move(candidates);
  j["subsample"] = state.subsample;
  ordered_json rungs = ordered_json::array();
  for (const auto& r : state.rungs) {
    ordered_json rj;
    rj["instruction_count"] = r.instruction_count;
    ordered_json evaluated = ordered_json::array();
    for (const auto& e : r.evaluated) evaluated.push_back(ResultToJson(e));
    rj["evaluated"] = std::move(evaluated);
    rj["ranking"] = r.ranking;
    rj["survivors"] = r.survivors;
    rj["pareto_front"] = r.pareto_front;
    rungs.push_back(std::move(rj));
  }
  j["rungs"] = std::move(rungs);
  j["annotation_counts"] = {
      {"planned", state.plan.PlannedAnnotations()},
      {"incremental", state.plan.IncrementalAnnotations()}};
  return j.dump(2) + "\n";
}

TuningState DeserializeState(std::string_view text) {
  const ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError("checkpoint is not a JSON object");
  }
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw DataError("unrecognized checkpoint format");
    }
    TuningState s;
    s.seed = j.at("seed").get<uint64_t>();
    for (const auto& r : j.at("plan")) {
      s.plan.rungs.push_back({r.at("survivor_count").get<size_t>(),
                              r.at("instruction_count").get<size_t>()});
    }
    s.battle_digest = j.at("battle_digest").get<std::string>();
    for (const auto& c : j.at("candidates")) {
      s.candidates.push_back(ParseJudgeConfig(c.dump()));
    }
    s.subsample = j.at("subsample").get<std::vector<std::string>>();
    for (const auto& rj : j.at("rungs")) {
      RungState r;
      r.instruction_count = rj.at("instruction_count").get<size_t>();
      for (const auto& e : rj.at("evaluated")) r.evaluated.push_back(ResultFromJson(e));
      r.ranking = rj.at("ranking").get<std::vector<std::string>>();
      r.survivors = rj.at("survivors").get<std::vector<std::string>>();
      r.pareto_front = rj.at("pareto_front").get<std::vector<std::string>>();
      s.rungs.push_back(std::move(r));
    }
    if (s.rungs.size() > s.plan.rungs.size()) {
      throw DataError("checkpoint has more rungs than its plan");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupted checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("corrupted checkpoint: ") + e.what());
  }
}

void WriteCheckpoint(const std::filesystem::path& path, const TuningState& state) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out << SerializeState(state);
    if (!out.flush()) throw DataError("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TuningState ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return DeserializeState(ss.str());
}

std::string BattleDigest(std::span<const Battle> battles) {
  uint64_t h = kFnvOffset;
  auto feed = [&](std::string_view s) {
    h = Fnv1a(s, h);
    h = Fnv1a(std::string_view("\0", 1), h);
  };
  for (const auto& b : battles) {
    feed(b.battle_id);
    feed(b.instruction);
    feed(b.output_a);
    feed(b.output_b);
    feed(b.human_label ? std::to_string(*b.human_label) : "-");
  }
  return Hex16(h);
}

std::vector<JudgeConfig> SelectCandidates(const std::vector<JudgeConfig>& space,
                                          const RungPlan& plan, uint64_t seed) {
  plan.Validate();
  const size_t n = plan.rungs[0].survivor_count;
  if (n > space.size()) {
    throw ConfigError("rung plan starts with " + std::to_string(n) +
                      " configs but the space has " + std::to_string(space.size()));
  }
  if (n == space.size()) return space;
  std::vector<size_t> idx(space.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(Mix64(seed ^ kCandidateStream));
  rng.Shuffle(idx);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<JudgeConfig> out;
  out.reserve(n);
  for (size_t i : idx) out.push_back(space[i]);
  return out;
}

ConfigResult SummarizeAnnotations(const std::string& config_hash,
                                  std::span<const Annotation> annotations,
                                  std::span<const Battle> battles) {
  std::unordered_map<std::string_view, const Battle*> by_id;
  for (const auto& b : battles) by_id.emplace(b.battle_id, &b);
  ConfigResult r;
  r.config_hash = config_hash;
  size_t hits = 0, n_costed = 0;
  double cost = 0.0;
  for (const auto& a : annotations) {
    switch (a.status) {
      case AnnotationStatus::kTransportFailed:
        ++r.n_transport_failed;
        continue;
      case AnnotationStatus::kParseFailed:
        ++r.n_parse_failed;
        break;
      case AnnotationStatus::kOk: {
        auto it = by_id.find(a.battle_id);
        if (it == by_id.end() || !it->second->human_label) {
          throw std::invalid_argument("no human label for battle " + a.battle_id);
        }
        ++r.n_used;
        hits += a.discrete && *a.discrete == *it->second->human_label;
        break;
      }
    }
    cost += a.cost;
    ++n_costed;
  }
  if (r.n_used > 0) r.agreement = static_cast<double>(hits) / r.n_used;
  if (n_costed > 0) r.cost_per_annotation = cost / n_costed;
  return r;
}

std::vector<std::string> RankResults(std::vector<ConfigResult>& results) {
  std::vector<ObjectivePoint> points;
  std::vector<size_t> point_owner;
  for (size_t i = 0; i < results.size(); ++i) {
    results[i].layer.reset();
    if (!results[i].agreement) continue;
    points.push_back({results[i].config_hash,
                      {*results[i].agreement, results[i].cost_per_annotation},
                      0});
    point_owner.push_back(i);
  }
  const ObjectiveSchema schema = AgreementCostSchema();
  std::vector<std::string> ranking;
  ranking.reserve(results.size());
  const auto layers = NonDominatedSort(points, schema);
  for (size_t l = 0; l < layers.size(); ++l) {
    for (size_t p : EpsilonNetOrder(points, layers[l], schema)) {
      ConfigResult& r = results[point_owner[p]];
      r.layer = l;
      r.rank = ranking.size();
      ranking.push_back(r.config_hash);
    }
  }
  // Configs without a single parsed annotation go last, in input order.
  for (auto& r : results) {
    if (r.agreement) continue;
    r.rank = ranking.size();
    ranking.push_back(r.config_hash);
  }
  return ranking;
}

TuningState RunSuccessiveHalving(const std::vector<JudgeConfig>& candidates,
                                 const RungPlan& plan,
                                 std::span<const Battle> battles,
                                 AnnotationEngine& engine, uint64_t seed,
                                 const TuningOptions& options) {
  plan.Validate();
  if (candidates.size() != plan.rungs[0].survivor_count) {
    throw ConfigError("the first rung expects " +
                      std::to_string(plan.rungs[0].survivor_count) +
                      " candidates, got " + std::to_string(candidates.size()));
  }
  const size_t pool_needed = plan.rungs.back().instruction_count;
  if (battles.size() < pool_needed) {
    throw ConfigError("the rung plan needs " + std::to_string(pool_needed) +
                      " battles, the pool has " + std::to_string(battles.size()));
  }
  std::unordered_map<std::string, const Battle*> by_id;
  for (const auto& b : battles) {
    if (!b.human_label) throw ConfigError("battle without human label: " + b.battle_id);
    if (!by_id.emplace(b.battle_id, &b).second) {
      throw DataError("duplicate battle id " + b.battle_id);
    }
  }

  TuningState state;
  state.seed = seed;
  state.plan = plan;
  state.candidates = candidates;
  state.battle_digest = BattleDigest(battles);
  {
    std::vector<size_t> idx(battles.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(Mix64(seed ^ kSubsampleStream));
    rng.Shuffle(idx);
    idx.resize(pool_needed);
    for (size_t i : idx) state.subsample.push_back(battles[i].battle_id);
  }

  if (options.checkpoint && std::filesystem::exists(*options.checkpoint)) {
    TuningState saved = ReadCheckpoint(*options.checkpoint);
    if (saved.seed != state.seed || !(saved.plan == state.plan) ||
        saved.battle_digest != state.battle_digest ||
        saved.subsample != state.subsample ||
        saved.candidates.size() != state.candidates.size()) {
      throw ConfigError("checkpoint " + options.checkpoint->string() +
                        " belongs to a different run");
    }
    for (size_t i = 0; i < saved.candidates.size(); ++i) {
      if (ConfigHash(saved.candidates[i]) != ConfigHash(state.candidates[i])) {
        throw ConfigError("checkpoint " + options.checkpoint->string() +
                          " belongs to a different candidate set");
      }
    }
    state = std::move(saved);
  }

  std::unordered_map<std::string, const JudgeConfig*> config_by_hash;
  for (const auto& c : state.candidates) config_by_hash.emplace(ConfigHash(c), &c);

  for (size_t r = state.rungs.size(); r < plan.rungs.size(); ++r) {
    if (options.stop_after_rungs && state.rungs.size() >= *options.stop_after_rungs) {
      break;
    }
    std::vector<const JudgeConfig*> configs;
    if (r == 0) {
      for (const auto& c : state.candidates) configs.push_back(&c);
    } else {
      for (const auto& h : state.rungs[r - 1].survivors) {
        configs.push_back(config_by_hash.at(h));
      }
    }
    const size_t n = plan.rungs[r].instruction_count;
    std::vector<Battle> subset;
    subset.reserve(n);
    for (size_t i = 0; i < n; ++i) subset.push_back(*by_id.at(state.subsample[i]));

    RungState rung;
    rung.instruction_count = n;
    rung.evaluated.reserve(configs.size());
    for (size_t c = 0; c < configs.size(); ++c) {
      const std::string hash = ConfigHash(*configs[c]);
      const std::vector<Annotation> annotations =
          engine.AnnotateBatch(*configs[c], subset);
      rung.evaluated.push_back(SummarizeAnnotations(hash, annotations, subset));
      if (options.on_progress) options.on_progress(r, c + 1, configs.size());
    }
    rung.ranking = RankResults(rung.evaluated);
    for (const auto& e : rung.evaluated) {
      if (e.layer && *e.layer == 0) rung.pareto_front.push_back(e.config_hash);
    }
    if (r + 1 < plan.rungs.size()) {
      rung.survivors.assign(
          rung.ranking.begin(),
          rung.ranking.begin() + plan.rungs[r + 1].survivor_count);
    }
    state.rungs.push_back(std::move(rung));
    if (options.checkpoint) WriteCheckpoint(*options.checkpoint, state);
  }
  return state;
}

}  // namespace judgetune
