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

#include <gtest/gtest.h>

#include <fstream>

#include "judgetune/errors.h"
#include "test_support.h"

namespace judgetune {
namespace {

constexpr char kModel[] = "qwen2.5-7b";

JudgeConfig MakeConfig(bool average, OutputType type = OutputType::kPair) {
  return {kModel, 0.0, average, {type, false, false, false, true}};
}

EngineOptions FastOptions() {
  EngineOptions o;
  o.backoff_initial = std::chrono::milliseconds(0);
  return o;
}

SimulationParams Sim(SimPolicy policy) {
  SimulationParams p;
  p.policy = policy;
  return p;
}

TEST(CombineOrdersTest, Examples) {
  EXPECT_DOUBLE_EQ(CombineOrders(0.8, 0.2), 0.8);
  EXPECT_EQ(CombineOrders(0.5, 0.5), 0.5);
  EXPECT_EQ(CombineOrders(1.0, 1.0), 0.5);
  EXPECT_EQ(CombineOrders(0.0, 0.0), 0.5);
  EXPECT_EQ(CombineOrders(1.0, 0.0), 1.0);
  EXPECT_EQ(CombineOrders(0.0, 1.0), 0.0);
}

TEST(CombineOrdersTest, ExactAntisymmetryAndRange) {
  Rng rng(11);
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.Uniform01(), y = rng.Uniform01();
    const double g = CombineOrders(x, y);
    EXPECT_EQ(CombineOrders(y, x), 1.0 - g);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
    EXPECT_NEAR(g, (x + 1.0 - y) / 2.0, 1e-15);
  }
}

TEST(SingleOrderTest, DeterministicAndBalanced) {
  int ab = 0;
  for (int i = 0; i < 4000; ++i) {
    const std::string id = "battle" + std::to_string(i);
    const PresentedOrder o = SingleOrderFor(id, "0123456789abcdef");
    EXPECT_EQ(o, SingleOrderFor(id, "0123456789abcdef"));
    ab += o == PresentedOrder::kAB;
  }
  EXPECT_GT(ab, 1800);
  EXPECT_LT(ab, 2200);
}

TEST(AnnotationJsonTest, RoundTrip) {
  Annotation a;
  a.battle_id = "x\"y";
  a.config_hash = "00ff00ff00ff00ff";
  a.preference = 0.75;
  a.discrete = 1.0;
  a.prompt_tokens = 12;
  a.completion_tokens = 3;
  a.cost = 0.0018;
  a.n_retries = 2;
  a.per_order_raw = {{PresentedOrder::kAB, "{\"score_A\": 1}\n"}, {PresentedOrder::kBA, "z"}};
  EXPECT_EQ(AnnotationFromJson(AnnotationToJson(a)), a);
  a.status = AnnotationStatus::kParseFailed;
  a.preference.reset();
  a.discrete.reset();
  EXPECT_EQ(AnnotationFromJson(AnnotationToJson(a)), a);
  EXPECT_EQ(AnnotationToJson(a).find('\n'), std::string::npos);
  EXPECT_THROW(AnnotationFromJson("{\"battle_id\": 1"), DataError);
  EXPECT_THROW(AnnotationFromJson("{}"), DataError);
}

TEST(AnnotationStoreTest, PersistsFirstRecordAndSkipsTruncatedLine) {
  testing::TempDir dir("store");
  Annotation a;
  a.battle_id = "b1";
  a.config_hash = "aaaaaaaaaaaaaaaa";
  a.preference = 0.0;
  a.discrete = 0.0;
  {
    AnnotationStore store(dir.path());
    store.Append(a);
    Annotation dup = a;
    dup.preference = 1.0;
    store.Append(dup);
    Annotation failed = a;
    failed.battle_id = "b2";
    failed.status = AnnotationStatus::kTransportFailed;
    store.Append(failed);
  }
  {
    std::ofstream out(dir.path() / "aaaaaaaaaaaaaaaa.jsonl", std::ios::app);
    out << "{\"battle_id\": \"b3\", \"config_ha";
  }
  AnnotationStore reopened(dir.path());
  const auto all = reopened.Load("aaaaaaaaaaaaaaaa");
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0], a);
  EXPECT_FALSE(reopened.Find("aaaaaaaaaaaaaaaa", "b2"));
  EXPECT_FALSE(reopened.Find("aaaaaaaaaaaaaaaa", "b3"));
  EXPECT_TRUE(reopened.Load("bbbbbbbbbbbbbbbb").empty());
}

TEST(EngineTest, OracleAverageReproducesLabels) {
  SimulatedBackend backend(Sim(SimPolicy::kOracle));
  AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), FastOptions());
  for (OutputType type : kAllOutputTypes) {
    for (const Battle& b : testing::RandomBattles(30, 12)) {
      const Annotation a = engine.Annotate(MakeConfig(true, type), b);
      ASSERT_EQ(a.status, AnnotationStatus::kOk);
      EXPECT_NEAR(*a.preference, *b.human_label, 1e-9);
      EXPECT_EQ(*a.discrete, *b.human_label);
      ASSERT_EQ(a.per_order_raw.size(), 2u);
      EXPECT_EQ(a.per_order_raw[0].order, PresentedOrder::kAB);
      EXPECT_EQ(a.per_order_raw[1].order, PresentedOrder::kBA);
      EXPECT_EQ(a.n_retries, 0);
      EXPECT_DOUBLE_EQ(a.cost, AnnotationCost(a.prompt_tokens, a.completion_tokens, kModel,
                                              DefaultPriceTable()));
      EXPECT_GT(a.prompt_tokens, 0);
    }
  }
}

TEST(EngineTest, SingleOrderUsesAssignedOrderAndOrientation) {
  SimulatedBackend backend(Sim(SimPolicy::kOracle));
  AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), FastOptions());
  const JudgeConfig config = MakeConfig(false);
  for (const Battle& b : testing::RandomBattles(40, 13)) {
    const Annotation a = engine.Annotate(config, b);
    ASSERT_EQ(a.per_order_raw.size(), 1u);
    EXPECT_EQ(a.per_order_raw[0].order, SingleOrderFor(b.battle_id, ConfigHash(config)));
    EXPECT_NEAR(*a.preference, *b.human_label, 1e-9);
  }
  EXPECT_EQ(engine.backend_calls(), 40u);
}

TEST(EngineTest, ParseRetriesThenSucceeds) {
  SimulationParams p = Sim(SimPolicy::kOracle);
  p.invalid_attempts = 3;
  SimulatedBackend backend(p);
  AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), FastOptions());
  const Battle b = testing::RandomBattles(1, 14)[0];
  const Annotation a = engine.Annotate(MakeConfig(true), b);
  EXPECT_EQ(a.status, AnnotationStatus::kOk);
  EXPECT_EQ(a.n_retries, 6);
  EXPECT_EQ(engine.backend_calls(), 8u);
}

TEST(EngineTest, ParseExhaustionMarksParseFailed) {
  SimulatedBackend backend(Sim(SimPolicy::kGarbage));
  EngineOptions o = FastOptions();
  o.max_retries = 2;
  AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), o);
  const Annotation a = engine.Annotate(MakeConfig(false), testing::RandomBattles(1, 15)[0]);
  EXPECT_EQ(a.status, AnnotationStatus::kParseFailed);
  EXPECT_FALSE(a.preference);
  EXPECT_FALSE(a.discrete);
  EXPECT_EQ(a.n_retries, 2);
  EXPECT_EQ(engine.backend_calls(), 3u);
  EXPECT_GT(a.cost, 0.0);
}

TEST(EngineTest, TransportRetriesAndFailure) {
  SimulationParams p = Sim(SimPolicy::kOracle);
  p.transport_failures = 2;
  SimulatedBackend flaky(p);
  AnnotationEngine engine(flaky, DefaultSearchSpace(), DefaultPriceTable(), FastOptions());
  const Battle b = testing::RandomBattles(1, 16)[0];
  EXPECT_EQ(engine.Annotate(MakeConfig(false), b).status, AnnotationStatus::kOk);
  EXPECT_EQ(engine.backend_calls(), 3u);

  p.transport_failures = 100;
  SimulatedBackend down(p);
  AnnotationStore store;
  AnnotationEngine failing(down, DefaultSearchSpace(), DefaultPriceTable(), FastOptions(), &store);
  const Battle batch[] = {b};
  const auto out = failing.AnnotateBatch(MakeConfig(false), batch);
  EXPECT_EQ(out[0].status, AnnotationStatus::kTransportFailed);
  EXPECT_EQ(failing.backend_calls(), 5u);
  EXPECT_FALSE(store.Find(ConfigHash(MakeConfig(false)), b.battle_id));
}

TEST(EngineTest, InvalidOptionsRejected) {
  SimulatedBackend backend(Sim(SimPolicy::kOracle));
  EngineOptions o = FastOptions();
  o.max_retries = -1;
  EXPECT_THROW(AnnotationEngine(backend, DefaultSearchSpace(), DefaultPriceTable(), o), ConfigError);
  o = FastOptions();
  o.parallelism = 0;
  EXPECT_THROW(AnnotationEngine(backend, DefaultSearchSpace(), DefaultPriceTable(), o), ConfigError);
  o = FastOptions();
  o.tie_band = 0.5;
  EXPECT_THROW(AnnotationEngine(backend, DefaultSearchSpace(), DefaultPriceTable(), o), ConfigError);
}

TEST(EngineTest, BatchIsIdempotentAgainstStore) {
  testing::TempDir dir("batch");
  const auto battles = testing::RandomBattles(25, 17);
  const JudgeConfig config = MakeConfig(true, OutputType::kLikert);
  std::vector<Annotation> first;
  {
    SimulatedBackend backend(Sim(SimPolicy::kContentHash));
    AnnotationStore store(dir.path());
    EngineOptions o = FastOptions();
    o.parallelism = 4;
    AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), o, &store);
    first = engine.AnnotateBatch(config, battles);
    EXPECT_EQ(engine.backend_calls(), 50u);
  }
  SimulatedBackend backend(Sim(SimPolicy::kContentHash));
  AnnotationStore store(dir.path());
  AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), FastOptions(), &store);
  size_t done = 0;
  const auto second = engine.AnnotateBatch(config, battles, [&](size_t) { ++done; });
  EXPECT_EQ(engine.backend_calls(), 0u);
  EXPECT_EQ(done, battles.size());
  EXPECT_EQ(first, second);
  for (size_t i = 0; i < battles.size(); ++i) {
    EXPECT_EQ(second[i], engine.Annotate(config, battles[i]));
  }
}

TEST(EngineTest, ParallelMatchesSequential) {
  const auto battles = testing::RandomBattles(40, 18);
  const JudgeConfig config = MakeConfig(false, OutputType::kMulti);
  SimulatedBackend backend(Sim(SimPolicy::kContentHash));
  AnnotationEngine seq(backend, DefaultSearchSpace(), DefaultPriceTable(), FastOptions());
  EngineOptions o = FastOptions();
  o.parallelism = 8;
  AnnotationEngine par(backend, DefaultSearchSpace(), DefaultPriceTable(), o);
  EXPECT_EQ(seq.AnnotateBatch(config, battles), par.AnnotateBatch(config, battles));
}

TEST(SmokeTestTest, Outcomes) {
  const JudgeConfig config = MakeConfig(true, OutputType::kBestModelIdentifier);
  {
    SimulatedBackend backend(Sim(SimPolicy::kOracle));
    AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), FastOptions());
    const SmokeTestResult r = SmokeTest(engine, config);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.verdict_ab, 0.0);
    EXPECT_EQ(r.verdict_ba, 0.0);
  }
  {
    SimulatedBackend backend(Sim(SimPolicy::kPositionBias));
    AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), FastOptions());
    const SmokeTestResult r = SmokeTest(engine, config);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.verdict_ab, 0.0);
    EXPECT_EQ(r.verdict_ba, 1.0);
  }
  {
    SimulatedBackend backend(Sim(SimPolicy::kGarbage));
    EngineOptions o = FastOptions();
    o.max_retries = 0;
    AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), o);
    const SmokeTestResult r = SmokeTest(engine, config);
    EXPECT_FALSE(r.pass);
    EXPECT_FALSE(r.verdict_ab);
    EXPECT_FALSE(r.verdict_ba);
  }
  const Battle probe = SmokeProbeBattle();
  EXPECT_EQ(probe.human_label, 0.0);
  EXPECT_GT(probe.output_a.size(), probe.output_b.size());
}

TEST(BaselineTest, LengthAndRandom) {
  Battle b;
  b.output_a = "longer answer";
  b.output_b = "short";
  EXPECT_EQ(BaselineJudge(BaselineKind::kLength, b).value(), 0.0);
  EXPECT_EQ(BaselineJudge(BaselineKind::kLength, Swapped(b)).value(), 1.0);
  b.output_b = b.output_a;
  EXPECT_EQ(BaselineJudge(BaselineKind::kLength, b).value(), 0.5);
  EXPECT_THROW(BaselineJudge(BaselineKind::kRandom, b), std::invalid_argument);

  Rng rng(19);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) {
    counts[static_cast<int>(BaselineJudge(BaselineKind::kRandom, b, &rng).value() * 2)]++;
  }
  for (int c : counts) EXPECT_NEAR(c / 30000.0, 1.0 / 3.0, 0.02);
}

}  // namespace
}  // namespace judgetune
