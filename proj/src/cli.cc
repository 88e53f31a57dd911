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

#include "judgetune/cli.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "judgetune/analysis.h"
#include "judgetune/annotation.h"
#include "judgetune/cost_model.h"
#include "judgetune/dataset_io.h"
#include "judgetune/errors.h"
#include "judgetune/metrics.h"
#include "judgetune/search_space.h"

namespace judgetune {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

template <typename T>
T Get(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("run config: invalid value for '" + what + "'");
  }
}

fs::path Resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

fs::path ExistingPath(const YAML::Node& node, const std::string& what,
                      const fs::path& base) {
  fs::path p = Resolve(base, Get<std::string>(node, what));
  if (!fs::exists(p)) {
    throw ConfigError("run config: " + what + " not found: " + p.string());
  }
  return p;
}

BackendSpec BackendFromNode(const YAML::Node& node, const fs::path& base) {
  if (!node.IsMap() || !node["kind"]) {
    throw ConfigError("backend: a 'kind' is required");
  }
  const std::string kind = Get<std::string>(node["kind"], "backend.kind");
  if (kind == "http_endpoint") {
    HttpEndpointParams p;
    if (!node["base_url"]) throw ConfigError("backend: base_url is required");
    p.base_url = Get<std::string>(node["base_url"], "backend.base_url");
    if (node["api_key_env"]) p.api_key_env = Get<std::string>(node["api_key_env"], "backend.api_key_env");
    if (node["timeout_s"]) p.timeout_s = Get<double>(node["timeout_s"], "backend.timeout_s");
    if (node["max_parallel"]) p.max_parallel = Get<int>(node["max_parallel"], "backend.max_parallel");
    if (node["max_tokens"]) p.max_tokens = Get<int>(node["max_tokens"], "backend.max_tokens");
    if (p.timeout_s <= 0 || p.max_parallel < 1) {
      throw ConfigError("backend: timeout_s must be > 0 and max_parallel >= 1");
    }
    return {p};
  }
  if (kind == "simulated") {
    SimulationParams p;
    if (node["policy"]) {
      try {
        p.policy = ParseSimPolicy(Get<std::string>(node["policy"], "backend.policy"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("backend: ") + e.what());
      }
    }
    if (node["noise_seed"]) p.noise_seed = Get<uint64_t>(node["noise_seed"], "backend.noise_seed");
    if (node["bias_rate"]) p.bias_rate = Get<double>(node["bias_rate"], "backend.bias_rate");
    if (node["accuracy_min"]) p.accuracy_min = Get<double>(node["accuracy_min"], "backend.accuracy_min");
    if (node["accuracy_max"]) p.accuracy_max = Get<double>(node["accuracy_max"], "backend.accuracy_max");
    if (node["noise_sigma"]) p.noise_sigma = Get<double>(node["noise_sigma"], "backend.noise_sigma");
    if (node["invalid_attempts"]) p.invalid_attempts = Get<int>(node["invalid_attempts"], "backend.invalid_attempts");
    if (node["transport_failures"]) p.transport_failures = Get<int>(node["transport_failures"], "backend.transport_failures");
    if (const YAML::Node r = node["token_range"]) {
      if (!r.IsSequence() || r.size() != 2) {
        throw ConfigError("backend: token_range must be [min, max]");
      }
      p.token_range = std::make_pair(Get<int64_t>(r[0], "backend.token_range"),
                                     Get<int64_t>(r[1], "backend.token_range"));
    }
    if (const YAML::Node planted = node["planted"]) {
      if (!planted.IsMap()) throw ConfigError("backend: planted must map config hashes");
      for (const auto& kv : planted) {
        PlantedJudge j;
        const std::string hash = Get<std::string>(kv.first, "backend.planted");
        if (kv.second["accuracy"]) j.accuracy = Get<double>(kv.second["accuracy"], "planted.accuracy");
        if (kv.second["prompt_tokens"]) j.prompt_tokens = Get<int64_t>(kv.second["prompt_tokens"], "planted.prompt_tokens");
        if (kv.second["completion_tokens"]) j.completion_tokens = Get<int64_t>(kv.second["completion_tokens"], "planted.completion_tokens");
        p.planted[hash] = j;
      }
    }
    return {p};
  }
  if (kind == "replay") {
    if (!node["path"]) throw ConfigError("backend: replay needs a path");
    return {ReplayParams{ExistingPath(node["path"], "backend.path", base)}};
  }
  throw ConfigError("backend: unknown kind '" + kind + "'");
}

// Holds an exclusive advisory lock on <dir>/.lock for the process lifetime.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path path = dir / ".lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw std::runtime_error("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw std::runtime_error("run directory " + dir.string() +
                               " is in use by another process");
    }
  }
  ~RunLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

std::string WithCommas(uint64_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(i, ",");
  return s;
}

std::string Fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct Overrides {
  std::string config;
  std::optional<uint64_t> seed;
  std::string output_dir;
  std::optional<int> parallelism;
  std::string search_space;
  std::string battles;
  std::string test_battles;
  std::string price_table;
  std::string sim_policy;
};

RunConfig ResolveConfig(const Overrides& o) {
  RunConfig rc;
  if (!o.config.empty()) rc = LoadRunConfig(o.config);
  auto existing = [](const std::string& p, const char* what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p);
    return fs::path(p);
  };
  if (o.seed) rc.seed = *o.seed;
  if (!o.output_dir.empty()) rc.output_dir = o.output_dir;
  if (o.parallelism) {
    if (*o.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    rc.parallelism = *o.parallelism;
  }
  if (!o.search_space.empty()) rc.search_space = existing(o.search_space, "search space");
  if (!o.battles.empty()) rc.battles = existing(o.battles, "battles");
  if (!o.test_battles.empty()) rc.test_battles = existing(o.test_battles, "test battles");
  if (!o.price_table.empty()) rc.price_table = existing(o.price_table, "price table");
  if (!o.sim_policy.empty()) {
    SimulationParams p;
    try {
      p.policy = ParseSimPolicy(o.sim_policy);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    rc.backend = BackendSpec{p};
  }
  return rc;
}

SearchSpace SpaceOf(const RunConfig& rc) {
  return rc.search_space ? LoadSearchSpace(*rc.search_space) : DefaultSearchSpace();
}

TokenPriceTable PricesOf(const RunConfig& rc) {
  return rc.price_table ? LoadPriceTable(*rc.price_table) : DefaultPriceTable();
}

uint64_t SeedOf(const RunConfig& rc) {
  if (!rc.seed) throw ConfigError("a seed is required (run config 'seed' or --seed)");
  return *rc.seed;
}

std::vector<Battle> BattlesOf(const std::optional<fs::path>& path, const char* what) {
  if (!path) throw ConfigError(std::string("no ") + what + " configured");
  return LoadBattles(*path, /*strict=*/true).battles;
}

EngineOptions EngineOptionsOf(const RunConfig& rc) {
  EngineOptions e;
  e.max_retries = rc.max_retries;
  e.tie_band = rc.tie_band;
  e.parallelism = rc.parallelism;
  return e;
}

void CheckPriced(const std::vector<JudgeConfig>& configs, const TokenPriceTable& prices) {
  std::set<std::string> missing;
  for (const auto& c : configs) {
    if (!prices.Contains(c.model_id)) missing.insert(c.model_id);
  }
  if (!missing.empty()) {
    throw ConfigError("no token price for model " + *missing.begin());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text).flush()) throw DataError("cannot write " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int CmdEnumerate(const RunConfig& rc, const std::string& out_path, bool config_given,
                 std::ostream& out) {
  const std::vector<JudgeConfig> configs = EnumerateConfigs(SpaceOf(rc));
  out << configs.size() << "\n";
  fs::path path = out_path;
  if (path.empty() && config_given) path = rc.output_dir / "configs.jsonl";
  if (!path.empty()) {
    std::string text;
    for (const auto& c : configs) text += CanonicalJson(c) + "\n";
    WriteText(path, text);
  }
  return 0;
}

struct SmokeSelection {
  std::vector<std::string> models;
  std::vector<std::string> output_types;
  std::vector<double> temperatures;
  std::vector<std::string> order_modes;
  std::string configs_file;
  bool strict = false;
};

int CmdSmokeTest(const RunConfig& rc, const SmokeSelection& sel, std::ostream& out) {
  const SearchSpace space = SpaceOf(rc);
  std::vector<JudgeConfig> selected;
  if (!sel.configs_file.empty()) {
    std::istringstream in(ReadText(sel.configs_file));
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      selected.push_back(ParseJudgeConfig(line));
    }
  } else {
    std::set<OutputType> types;
    for (const auto& t : sel.output_types) types.insert(ParseOutputType(t));
    for (const auto& c : EnumerateConfigs(space)) {
      auto has = [](const auto& v, const auto& x) {
        return v.empty() || std::find(v.begin(), v.end(), x) != v.end();
      };
      if (!has(sel.models, c.model_id) || !has(sel.temperatures, c.temperature)) continue;
      if (!types.empty() && !types.count(c.prompt.output_type)) continue;
      if (!has(sel.order_modes, std::string(c.average_orders ? "average" : "single"))) continue;
      selected.push_back(c);
    }
  }
  if (selected.empty()) {
    out << "no configurations selected\n";
    return 0;
  }
  if (!rc.backend) throw ConfigError("no backend configured");
  auto backend = MakeBackend(*rc.backend);
  AnnotationEngine engine(*backend, space, PricesOf(rc), EngineOptionsOf(rc));
  std::ostringstream csv;
  csv << "config_hash,config,status,verdict_ab,verdict_ba\n";
  size_t passed = 0, failed = 0, untested = 0;
  auto fmt = [](const std::optional<double>& v) { return v ? Fixed(*v, 1) : std::string(); };
  for (const auto& c : selected) {
    std::string status;
    SmokeTestResult r;
    try {
      r = SmokeTest(engine, c);
      status = r.pass ? "pass" : "fail";
      ++(r.pass ? passed : failed);
    } catch (const TransportError&) {
      status = "untested";
      ++untested;
    }
    std::string cfg = CanonicalJson(c);
    std::string quoted = "\"";
    for (char ch : cfg) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    quoted += "\"";
    csv << ConfigHash(c) << ',' << quoted << ',' << status << ',' << fmt(r.verdict_ab)
        << ',' << fmt(r.verdict_ba) << '\n';
  }
  WriteText(rc.output_dir / "smoke_test.csv", csv.str());
  out << "smoke test: " << passed << " passed, " << failed << " failed, " << untested
      << " untested of " << selected.size() << "\n";
  return sel.strict && failed > 0 ? 1 : 0;
}

struct TuneFlags {
  bool dry_run = false;
  std::optional<size_t> stop_after_rung;
  double seconds_per_annotation = 0.6;
  double hourly_rate = 2.79;
  bool quiet = false;
};

int CmdTune(const RunConfig& rc, const TuneFlags& flags, std::ostream& out,
            std::ostream& err) {
  const RungPlan& plan = rc.rung_plan;
  plan.Validate();
  if (flags.dry_run) {
    const uint64_t planned = plan.PlannedAnnotations();
    out << "planned annotations: " << WithCommas(planned) << "\n";
    out << "with reuse across rungs: " << WithCommas(plan.IncrementalAnnotations()) << "\n";
    out << "estimated cost: "
        << Fixed(CampaignCostEstimate(planned, flags.seconds_per_annotation, flags.hourly_rate), 2)
        << " (" << flags.seconds_per_annotation << " s per annotation at "
        << flags.hourly_rate << " per hour)\n";
    return 0;
  }
  const uint64_t seed = SeedOf(rc);
  const SearchSpace space = SpaceOf(rc);
  const TokenPriceTable prices = PricesOf(rc);
  const std::vector<JudgeConfig> candidates =
      SelectCandidates(EnumerateConfigs(space), plan, seed);
  CheckPriced(candidates, prices);
  const std::vector<Battle> battles = BattlesOf(rc.battles, "battles");
  if (!rc.backend) throw ConfigError("no backend configured");

  RunLock lock(rc.output_dir);
  auto backend = MakeBackend(*rc.backend);
  AnnotationStore store(rc.output_dir / "annotations");
  AnnotationEngine engine(*backend, space, prices, EngineOptionsOf(rc), &store);
  TuningOptions options;
  options.checkpoint = rc.output_dir / "checkpoint.json";
  if (flags.stop_after_rung) options.stop_after_rungs = *flags.stop_after_rung;
  if (!flags.quiet) {
    options.on_progress = [&err](size_t rung, size_t done, size_t total) {
      if (done == total || done % 100 == 0) {
        err << "rung " << rung << ": " << done << "/" << total << " configs\n";
      }
    };
  }
  const TuningState state =
      RunSuccessiveHalving(candidates, plan, battles, engine, seed, options);
  out << "completed rungs: " << state.rungs.size() << "/" << plan.rungs.size() << "\n";
  out << "planned annotations: " << WithCommas(plan.PlannedAnnotations()) << "\n";
  out << "with reuse across rungs: " << WithCommas(plan.IncrementalAnnotations()) << "\n";
  out << "backend calls this session: " << engine.backend_calls() << "\n";
  if (!state.rungs.empty()) {
    ReportInputs inputs;
    inputs.space = &space;
    EmitReport(state, inputs, rc.output_dir / "report");
    const RungState& last = state.rungs.back();
    std::map<std::string, const ConfigResult*> by_hash;
    for (const auto& e : last.evaluated) by_hash[e.config_hash] = &e;
    out << "top configurations (rung " << state.rungs.size() - 1 << "):\n";
    for (size_t i = 0; i < std::min<size_t>(5, last.ranking.size()); ++i) {
      const ConfigResult& e = *by_hash.at(last.ranking[i]);
      out << "  " << i << "  " << e.config_hash << "  agreement="
          << (e.agreement ? Fixed(*e.agreement, 4) : std::string("n/a"))
          << "  cost=" << e.cost_per_annotation << "\n";
    }
  }
  return 0;
}

struct EvaluateFlags {
  std::string judge;
  std::optional<size_t> rank;
  std::string baseline;
  std::string golden;
  std::string baseline_model;
  int resamples = 100;
};

std::map<std::string, double> LoadGolden(const fs::path& path) {
  std::map<std::string, double> golden;
  std::istringstream in(ReadText(path));
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_object() || !j.contains("model_id") || !j.contains("golden_score") ||
        !j["golden_score"].is_number()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected {model_id, golden_score}");
    }
    golden[j["model_id"].get<std::string>()] = j["golden_score"].get<double>();
  }
  return golden;
}

ordered_json ReportJson(const MetricReport& r) {
  ordered_json j;
  j["point"] = r.point;
  j["bootstrap_mean"] = r.bootstrap_mean;
  j["bootstrap_std"] = r.bootstrap_std;
  j["n_resamples"] = r.n_resamples;
  j["n_samples"] = r.n_samples;
  j["n_excluded"] = r.n_excluded;
  j["seed"] = r.seed;
  return j;
}

int CmdEvaluate(const RunConfig& rc, const EvaluateFlags& flags, std::ostream& out) {
  const uint64_t seed = SeedOf(rc);
  const std::vector<Battle> battles = BattlesOf(rc.test_battles, "test_battles");
  const SearchSpace space = SpaceOf(rc);
  ordered_json report;
  std::vector<Annotation> annotations;
  std::unique_ptr<ChatBackend> backend;
  std::unique_ptr<AnnotationStore> store;
  std::unique_ptr<AnnotationEngine> engine;
  std::optional<JudgeConfig> config;

  if (!flags.baseline.empty()) {
    if (!flags.judge.empty() || flags.rank) {
      throw ConfigError("--baseline excludes --judge and --rank");
    }
    BaselineKind kind;
    if (flags.baseline == "random") {
      kind = BaselineKind::kRandom;
    } else if (flags.baseline == "length") {
      kind = BaselineKind::kLength;
    } else {
      throw ConfigError("unknown baseline '" + flags.baseline + "'");
    }
    report["judge"] = "baseline:" + flags.baseline;
    Rng rng(seed);
    for (const auto& b : battles) {
      Annotation a;
      a.battle_id = b.battle_id;
      a.config_hash = "baseline-" + flags.baseline;
      const double p = BaselineJudge(kind, b, &rng).value();
      a.preference = p;
      a.discrete = Discretize(PreferenceScore(p), rc.tie_band);
      annotations.push_back(std::move(a));
    }
  } else {
    if (!flags.judge.empty()) {
      config = ParseJudgeConfig(flags.judge[0] == '@' ? ReadText(flags.judge.substr(1))
                                                      : flags.judge);
    } else {
      const fs::path ckpt = rc.output_dir / "checkpoint.json";
      if (!fs::exists(ckpt)) {
        throw ConfigError("no --judge given and no checkpoint at " + ckpt.string());
      }
      const TuningState state = ReadCheckpoint(ckpt);
      if (state.rungs.empty()) throw ConfigError("checkpoint has no completed rung");
      const auto& ranking = state.rungs.back().ranking;
      const size_t r = flags.rank.value_or(0);
      if (r >= ranking.size()) throw ConfigError("--rank beyond the final ranking");
      const JudgeConfig* c = state.FindConfig(ranking[r]);
      if (c == nullptr) throw DataError("checkpoint ranking names an unknown config");
      config = *c;
    }
    if (!rc.backend) throw ConfigError("no backend configured");
    const TokenPriceTable prices = PricesOf(rc);
    CheckPriced({*config}, prices);
    backend = MakeBackend(*rc.backend);
    store = std::make_unique<AnnotationStore>(rc.output_dir / "annotations");
    engine = std::make_unique<AnnotationEngine>(*backend, space, prices,
                                                EngineOptionsOf(rc), store.get());
    report["judge"] = ordered_json::parse(CanonicalJson(*config));
    report["config_hash"] = ConfigHash(*config);
    annotations = engine->AnnotateBatch(*config, battles);
  }

  report["n_battles"] = battles.size();
  const MetricReport agreement = HumanAgreement(annotations, battles, flags.resamples, seed);
  report["human_agreement"] = ReportJson(agreement);
  size_t parse_failed = 0, transport_failed = 0;
  double cost = 0.0;
  for (const auto& a : annotations) {
    parse_failed += a.status == AnnotationStatus::kParseFailed;
    transport_failed += a.status == AnnotationStatus::kTransportFailed;
    cost += a.cost;
  }
  report["parse_failure_rate"] = static_cast<double>(parse_failed) / annotations.size();
  report["transport_failures"] = transport_failed;
  report["cost_per_1k_annotations"] = cost / annotations.size() * 1000.0;
  std::optional<FlipRateResult> flips;
  if (engine) {
    flips = FlipRate(*engine, *config, battles);
    report["flip_rate"] = {{"rate", flips->rate},
                           {"n_used", flips->n_used},
                           {"n_excluded", flips->n_excluded}};
  }
  const std::string golden_path =
      !flags.golden.empty() ? flags.golden
                            : (rc.golden_scores ? rc.golden_scores->string() : "");
  if (!golden_path.empty()) {
    if (flags.baseline_model.empty()) {
      throw ConfigError("--golden needs --baseline-model");
    }
    const auto scores = ModelScores(annotations, battles, flags.baseline_model);
    const MetricReport sp =
        SpearmanVsGolden(scores, LoadGolden(golden_path), flags.resamples, seed);
    report["spearman"] = ReportJson(sp);
    ordered_json ms = ordered_json::object();
    for (const auto& [m, s] : scores) ms[m] = s;
    report["model_scores"] = std::move(ms);
  }
  WriteText(rc.output_dir / "evaluation.json", report.dump(2) + "\n");

  out << "human agreement: " << Fixed(agreement.point, 4);
  if (agreement.n_resamples > 0) {
    out << " (bootstrap " << Fixed(agreement.bootstrap_mean, 4) << " +- "
        << Fixed(agreement.bootstrap_std, 4) << ", " << agreement.n_resamples
        << " resamples)";
  }
  out << "\nused " << agreement.n_samples - agreement.n_excluded << " of "
      << agreement.n_samples << " annotations\n";
  if (flips) out << "flip rate: " << Fixed(flips->rate, 4) << "\n";
  out << "cost per 1K annotations: " << Fixed(cost / annotations.size() * 1000.0, 4) << "\n";
  if (report.contains("spearman")) {
    out << "spearman vs golden: " << Fixed(report["spearman"]["point"].get<double>(), 4) << "\n";
  }
  return 0;
}

int CmdReport(const RunConfig& rc, const std::string& checkpoint, const std::string& out_dir,
              std::ostream& out) {
  const fs::path ckpt = checkpoint.empty() ? rc.output_dir / "checkpoint.json" : fs::path(checkpoint);
  if (!fs::exists(ckpt)) throw ConfigError("checkpoint not found: " + ckpt.string());
  const TuningState state = ReadCheckpoint(ckpt);
  const SearchSpace space = SpaceOf(rc);
  ReportInputs inputs;
  inputs.space = &space;
  const fs::path dir = out_dir.empty() ? rc.output_dir / "report" : fs::path(out_dir);
  for (const auto& name : EmitReport(state, inputs, dir)) out << (dir / name).string() << "\n";
  return 0;
}

}  // namespace

RunConfig LoadRunConfig(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("run config not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse run config " + path.string() + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError("run config must be a mapping");
  const fs::path base = path.parent_path();
  RunConfig rc;
  if (root["seed"]) rc.seed = Get<uint64_t>(root["seed"], "seed");
  if (root["search_space"]) rc.search_space = ExistingPath(root["search_space"], "search_space", base);
  if (const YAML::Node plan = root["rung_plan"]) {
    if (!plan.IsSequence()) throw ConfigError("run config: rung_plan must be a list");
    rc.rung_plan.rungs.clear();
    for (const auto& r : plan) {
      Rung rung;
      if (r.IsSequence() && r.size() == 2) {
        rung.survivor_count = Get<size_t>(r[0], "rung_plan");
        rung.instruction_count = Get<size_t>(r[1], "rung_plan");
      } else if (r.IsMap() && r["survivors"] && r["instructions"]) {
        rung.survivor_count = Get<size_t>(r["survivors"], "rung_plan.survivors");
        rung.instruction_count = Get<size_t>(r["instructions"], "rung_plan.instructions");
      } else {
        throw ConfigError("run config: rung entries are [survivors, instructions]");
      }
      rc.rung_plan.rungs.push_back(rung);
    }
    rc.rung_plan.Validate();
  }
  if (root["backend"]) rc.backend = BackendFromNode(root["backend"], base);
  if (root["battles"]) rc.battles = ExistingPath(root["battles"], "battles", base);
  if (root["test_battles"]) rc.test_battles = ExistingPath(root["test_battles"], "test_battles", base);
  if (root["golden_scores"]) rc.golden_scores = ExistingPath(root["golden_scores"], "golden_scores", base);
  if (root["price_table"]) rc.price_table = ExistingPath(root["price_table"], "price_table", base);
  if (root["output_dir"]) rc.output_dir = Resolve(base, Get<std::string>(root["output_dir"], "output_dir"));
  if (root["parallelism"]) rc.parallelism = Get<int>(root["parallelism"], "parallelism");
  if (root["max_retries"]) rc.max_retries = Get<int>(root["max_retries"], "max_retries");
  if (root["tie_band"]) rc.tie_band = Get<double>(root["tie_band"], "tie_band");
  if (rc.parallelism < 1) throw ConfigError("run config: parallelism must be >= 1");
  if (rc.max_retries < 0) throw ConfigError("run config: max_retries must be >= 0");
  if (!(rc.tie_band >= 0.0 && rc.tie_band < 0.5)) {
    throw ConfigError("run config: tie_band must be in [0, 0.5)");
  }
  return rc;
}

BackendSpec ParseBackendSpec(const std::string& yaml, const fs::path& base_dir) {
  YAML::Node node;
  try {
    node = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("cannot parse backend spec: ") + e.what());
  }
  return BackendFromNode(node, base_dir);
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-objective tuning of LLM-judge configurations", "judgetune"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&o](CLI::App* cmd) {
    cmd->add_option("-c,--config", o.config, "Run config file (YAML)");
    cmd->add_option("--seed", o.seed, "Global seed");
    cmd->add_option("--output-dir", o.output_dir, "Run directory");
    cmd->add_option("--parallelism", o.parallelism, "Concurrent backend requests");
    cmd->add_option("--search-space", o.search_space, "Search-space file (YAML)");
    cmd->add_option("--battles", o.battles, "Validation battles (JSONL)");
    cmd->add_option("--test-battles", o.test_battles, "Test battles (JSONL)");
    cmd->add_option("--price-table", o.price_table, "Token price table (CSV)");
    cmd->add_option("--sim-policy", o.sim_policy, "Use a simulated backend with this policy");
  };

  std::string enumerate_out;
  CLI::App* enumerate = app.add_subcommand("enumerate", "Count and list the search space");
  add_common(enumerate);
  enumerate->add_option("-o,--out", enumerate_out, "Write canonical configs (JSONL)");

  SmokeSelection sel;
  CLI::App* smoke = app.add_subcommand("smoke-test", "Check configs on an obvious probe battle");
  add_common(smoke);
  smoke->add_option("--model", sel.models, "Restrict to model ids");
  smoke->add_option("--output-type", sel.output_types, "Restrict to output types");
  smoke->add_option("--temperature", sel.temperatures, "Restrict to temperatures");
  smoke->add_option("--order-mode", sel.order_modes, "Restrict to order modes")
      ->check(CLI::IsMember({"average", "single"}));
  smoke->add_option("--configs", sel.configs_file, "Explicit configs (JSONL)");
  smoke->add_flag("--strict", sel.strict, "Exit 1 if any config fails");

  TuneFlags tf;
  CLI::App* tune = app.add_subcommand("tune", "Run successive halving over the space");
  add_common(tune);
  tune->add_flag("--dry-run", tf.dry_run, "Print planned annotations and cost only");
  tune->add_option("--stop-after-rung", tf.stop_after_rung, "Stop after this many rungs");
  tune->add_option("--seconds-per-annotation", tf.seconds_per_annotation, "Dry-run estimate input");
  tune->add_option("--hourly-rate", tf.hourly_rate, "Dry-run estimate input");
  tune->add_flag("-q,--quiet", tf.quiet, "No progress output");

  EvaluateFlags ef;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a judge on test battles");
  add_common(evaluate);
  evaluate->add_option("--judge", ef.judge, "Judge config as JSON, or @file");
  evaluate->add_option("--rank", ef.rank, "Judge at this rank of the final checkpoint ranking");
  evaluate->add_option("--baseline", ef.baseline, "random or length");
  evaluate->add_option("--golden", ef.golden, "Golden model scores (JSONL)");
  evaluate->add_option("--baseline-model", ef.baseline_model, "Reference model for model scores");
  evaluate->add_option("--resamples", ef.resamples, "Bootstrap resamples");

  std::string report_checkpoint, report_out;
  CLI::App* report = app.add_subcommand("report", "Write CSV and SVG reports from a checkpoint");
  add_common(report);
  report->add_option("--checkpoint", report_checkpoint, "Checkpoint file");
  report->add_option("-o,--out", report_out, "Report directory");

  std::vector<const char*> argv{"judgetune"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    const RunConfig rc = ResolveConfig(o);
    if (*enumerate) return CmdEnumerate(rc, enumerate_out, !o.config.empty(), out);
    if (*smoke) return CmdSmokeTest(rc, sel, out);
    if (*tune) return CmdTune(rc, tf, out, err);
    if (*evaluate) return CmdEvaluate(rc, ef, out);
    if (*report) return CmdReport(rc, report_checkpoint, report_out, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace judgetune
