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

#include "judgetune/analysis.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "judgetune/errors.h"
#include "test_support.h"

namespace judgetune {
namespace {

SearchSpace TwoModelSpace() {
  SearchSpace s;
  s.models = {{"qwen2.5-7b", "qwen2.5-7b", 7.0}, {"qwen2.5-72b", "qwen2.5-72b", 72.0}};
  s.temperatures = {0.0, 1.0};
  s.order_modes = {false};
  return s;
}

double Pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

TEST(SurvivalTest, Example) {
  const SearchSpace space = TwoModelSpace();
  const PromptConfig pair{OutputType::kPair, true, false, false, true};
  const PromptConfig likert{OutputType::kLikert, false, false, false, false};
  const std::vector<JudgeConfig> ranked = {
      {"qwen2.5-7b", 0.0, false, pair},
      {"qwen2.5-72b", 1.0, false, likert},
      {"qwen2.5-7b", 1.0, false, likert},
      {"qwen2.5-7b", 0.0, false, likert},
  };
  const SurvivalReport r = SurvivalAnalysis(ranked, 2, space);
  EXPECT_EQ(r.small.n_configs, 2u);
  EXPECT_EQ(r.large.n_configs, 1u);
  const FrequencyTable& small = *r.small.frequencies;
  EXPECT_EQ(small.at("output_type").at("pair"), 0.5);
  EXPECT_EQ(small.at("output_type").at("likert"), 0.5);
  EXPECT_EQ(small.at("output_type").at("multi"), 0.0);
  EXPECT_EQ(small.at("temperature").at("0"), 0.5);
  EXPECT_EQ(small.at("use_json").at("true"), 0.5);
  EXPECT_EQ(small.at("model").at("qwen2.5-7b"), 1.0);
  EXPECT_EQ(small.at("model").count("qwen2.5-72b"), 0u);
  EXPECT_EQ(r.large.frequencies->at("temperature").at("1"), 1.0);
  EXPECT_THROW(SurvivalAnalysis(ranked, 5, space), std::invalid_argument);
}

TEST(SurvivalTest, EmptyStratumIsUndefined) {
  const SearchSpace space = TwoModelSpace();
  const std::vector<JudgeConfig> ranked = {{"qwen2.5-7b", 0.0, false, {}}};
  const SurvivalReport r = SurvivalAnalysis(ranked, 1, space);
  EXPECT_TRUE(r.small.frequencies);
  EXPECT_FALSE(r.large.frequencies);
  EXPECT_EQ(r.large.n_configs, 0u);
}

TEST(SurvivalTest, FrequenciesSumToOne) {
  const SearchSpace space = TwoModelSpace();
  auto configs = EnumerateConfigs(space);
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    rng.Shuffle(configs);
    const size_t k = 1 + rng.UniformIndex(configs.size());
    const SurvivalReport r = SurvivalAnalysis(configs, k, space);
    for (const SurvivalStratum* s : {&r.small, &r.large}) {
      EXPECT_EQ(s->n_configs, std::min<size_t>(k, 160));
      for (const auto& [name, values] : *s->frequencies) {
        double sum = 0;
        for (const auto& [v, f] : values) sum += f;
        EXPECT_NEAR(sum, 1.0, 1e-12) << name;
      }
    }
  }
}

TEST(StabilityMatrixTest, MatchesPairwisePearson) {
  Rng rng(62);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t m = 1 + rng.UniformIndex(6), n = 2 + rng.UniformIndex(30);
    std::vector<std::vector<double>> x(m, std::vector<double>(n));
    for (auto& row : x) {
      for (double& v : row) v = rng.Uniform01();
    }
    const StabilityMatrix s = PromptStabilityMatrix(x);
    ASSERT_EQ(s.size, m);
    for (size_t i = 0; i < m; ++i) {
      EXPECT_EQ(s.at(i, i), 1.0);
      for (size_t j = 0; j < m; ++j) {
        EXPECT_TRUE(s.is_defined(i, j));
        EXPECT_EQ(s.at(i, j), s.at(j, i));
        EXPECT_NEAR(s.at(i, j), Pearson(x[i], x[j]), 1e-12);
      }
    }
  }
}

TEST(StabilityMatrixTest, ConstantRowsAndShapeErrors) {
  const StabilityMatrix s = PromptStabilityMatrix({{1, 2, 3}, {5, 5, 5}, {3, 2, 1}});
  EXPECT_FALSE(s.is_defined(0, 1));
  EXPECT_FALSE(s.is_defined(1, 1));
  EXPECT_TRUE(s.is_defined(0, 2));
  EXPECT_DOUBLE_EQ(s.at(0, 2), -1.0);
  EXPECT_THROW(PromptStabilityMatrix({{1}, {2}}), std::invalid_argument);
  EXPECT_THROW(PromptStabilityMatrix({{1, 2}, {2, 3, 4}}), std::invalid_argument);
}

TEST(ScalingCurvesTest, CellsAndDeterminism) {
  std::map<double, std::vector<Annotation>> pools;
  for (double size : {7.0, 72.0}) {
    for (int i = 0; i < 20; ++i) {
      Annotation a;
      a.battle_id = std::to_string(i);
      a.preference = (i % 4) / 4.0;
      pools[size].push_back(a);
    }
  }
  pools[72.0].resize(10);
  const AnnotationMetric mean = [](std::span<const Annotation> s) {
    double t = 0;
    for (const auto& a : s) t += *a.preference;
    return t / s.size();
  };
  const size_t counts[] = {5, 10, 20};
  const auto cells = ScalingCurves(pools, counts, mean, 30, 1);
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_FALSE(cells[0].missing);
  EXPECT_GT(cells[0].dispersion, 0.0);
  EXPECT_NEAR(cells[2].value, 0.375, 1e-12);
  EXPECT_NEAR(cells[2].dispersion, 0.0, 1e-12);
  EXPECT_TRUE(cells[5].missing);
  const auto again = ScalingCurves(pools, counts, mean, 30, 1);
  for (size_t i = 0; i < cells.size(); ++i) EXPECT_EQ(cells[i].value, again[i].value);

  const AnnotationMetric undefined = [](std::span<const Annotation>) -> double {
    throw UndefinedMetricError("x");
  };
  for (const auto& c : ScalingCurves(pools, counts, undefined, 3, 1)) EXPECT_TRUE(c.missing);
  EXPECT_THROW(ScalingCurves(pools, counts, mean, 0, 1), std::invalid_argument);
}

class ReportTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SimulationParams p;
    p.policy = SimPolicy::kContentHash;
    SimulatedBackend backend(p);
    EngineOptions o;
    o.backoff_initial = std::chrono::milliseconds(0);
    AnnotationStore store;
    AnnotationEngine engine(backend, space_, DefaultPriceTable(), o, &store);
    const RungPlan plan{{{320, 8}, {40, 16}}};
    state_ = RunSuccessiveHalving(EnumerateConfigs(space_), plan,
                                  testing::RandomBattles(20, 63), engine, 2);
  }
  SearchSpace space_ = TwoModelSpace();
  TuningState state_;
};

TEST_F(ReportTest, WritesExpectedFilesDeterministically) {
  testing::TempDir a("report-a"), b("report-b");
  ReportInputs in;
  in.space = &space_;
  in.survival_k = 20;
  const auto files = EmitReport(state_, in, a.path());
  EXPECT_EQ(files, (std::vector<std::string>{"rung_0_objectives.csv", "rung_0_scatter.svg",
                                             "rung_1_objectives.csv", "rung_1_scatter.svg",
                                             "pareto_front.csv", "survival.csv",
                                             "stability_matrix.csv"}));
  EXPECT_EQ(EmitReport(state_, in, b.path()), files);
  for (const auto& f : files) {
    EXPECT_EQ(testing::ReadFile(a.path() / f), testing::ReadFile(b.path() / f)) << f;
  }
  const std::string rung0 = testing::ReadFile(a.path() / "rung_0_objectives.csv");
  EXPECT_EQ(std::count(rung0.begin(), rung0.end(), '\n'), 321);
  EXPECT_EQ(rung0.rfind("rank,config_hash,model,temperature,", 0), 0u);
  EXPECT_EQ(std::count(rung0.begin(), rung0.end(), ','), 321 * 16);
  const std::string svg = testing::ReadFile(a.path() / "rung_1_scatter.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  const std::string survival = testing::ReadFile(a.path() / "survival.csv");
  EXPECT_NE(survival.find("small,20,output_type,pair,"), std::string::npos);
  EXPECT_NE(survival.find("large,20,model,qwen2.5-72b,1\n"), std::string::npos);
}

TEST_F(ReportTest, UnwritableDirectoryIsDataError) {
  testing::TempDir dir("report-bad");
  testing::WriteFile(dir.path() / "file", "x");
  ReportInputs in;
  in.space = &space_;
  EXPECT_THROW(EmitReport(state_, in, dir.path() / "file" / "sub"), DataError);
  EXPECT_THROW(EmitReport(TuningState{}, in, dir.path() / "r"), std::invalid_argument);
}

}  // namespace
}  // namespace judgetune
