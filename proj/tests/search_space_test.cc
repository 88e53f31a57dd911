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

#include "judgetune/search_space.h"

#include <gtest/gtest.h>

#include <set>

#include "judgetune/errors.h"
#include "test_support.h"

namespace judgetune {
namespace {

TEST(SearchSpaceTest, DefaultSpaceHas4480Configs) {
  EXPECT_EQ(EnumerateConfigs(DefaultSearchSpace()).size(), 4480u);
  EXPECT_EQ(DefaultSearchSpace().Size(), 4480u);
}

TEST(SearchSpaceTest, SingleModelTemperatureOrderGives80) {
  SearchSpace s;
  s.models = {{"m", "m", 1.0}};
  s.temperatures = {0.0};
  s.order_modes = {true};
  EXPECT_EQ(EnumerateConfigs(s).size(), 80u);
}

TEST(SearchSpaceTest, EmptyListsAreConfigErrors) {
  SearchSpace s = DefaultSearchSpace();
  s.models.clear();
  EXPECT_THROW(EnumerateConfigs(s), ConfigError);
  s = DefaultSearchSpace();
  s.temperatures.clear();
  EXPECT_THROW(EnumerateConfigs(s), ConfigError);
  s = DefaultSearchSpace();
  s.temperatures = {-0.1};
  EXPECT_THROW(EnumerateConfigs(s), ConfigError);
}

TEST(SearchSpaceTest, EnumerationMatchesNestedLoops) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    SearchSpace s;
    const size_t nm = 1 + rng.UniformIndex(3), nt = 1 + rng.UniformIndex(3);
    for (size_t i = 0; i < nm; ++i) s.models.push_back({"m" + std::to_string(i), "", 1.0});
    for (size_t i = 0; i < nt; ++i) s.temperatures.push_back(0.5 * i);
    s.order_modes = rng.UniformIndex(2) ? std::vector<bool>{false, true} : std::vector<bool>{true};
    std::vector<JudgeConfig> expected;
    for (const auto& m : s.models) {
      for (double t : s.temperatures) {
        for (bool o : s.order_modes) {
          for (int type = 0; type < 5; ++type) {
            for (int bits = 0; bits < 16; ++bits) {
              expected.push_back({m.id, t, o,
                                  {static_cast<OutputType>(type), (bits & 8) != 0,
                                   (bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0}});
            }
          }
        }
      }
    }
    EXPECT_EQ(EnumerateConfigs(s), expected);
  }
}

TEST(SearchSpaceTest, NoDuplicateHashes) {
  std::set<std::string> hashes;
  for (const auto& c : EnumerateConfigs(DefaultSearchSpace())) hashes.insert(ConfigHash(c));
  EXPECT_EQ(hashes.size(), 4480u);
}

TEST(SearchSpaceTest, PromptIndexMatchesEnumeration) {
  const auto prompts = AllPromptConfigs();
  ASSERT_EQ(prompts.size(), kNumPromptConfigs);
  for (size_t i = 0; i < prompts.size(); ++i) EXPECT_EQ(PromptIndex(prompts[i]), i);
}

TEST(SearchSpaceTest, CanonicalJsonRoundTrip) {
  for (const auto& c : EnumerateConfigs(DefaultSearchSpace())) {
    const std::string j = CanonicalJson(c);
    EXPECT_EQ(ParseJudgeConfig(j), c);
    EXPECT_EQ(CanonicalJson(ParseJudgeConfig(j)), j);
  }
  EXPECT_THROW(ParseJudgeConfig("not json"), ConfigError);
  EXPECT_THROW(ParseJudgeConfig("{\"model\": 3}"), ConfigError);
}

TEST(SearchSpaceTest, HashIsStable) {
  const JudgeConfig c{"qwen2.5-7b", 0.1, true, {OutputType::kPair, true, false, true, true}};
  EXPECT_EQ(ConfigHash(c), ConfigHash(ParseJudgeConfig(CanonicalJson(c))));
  EXPECT_EQ(ConfigHash(c).size(), 16u);
}

TEST(RenderPromptTest, PairJsonWithExample) {
  const std::string p = RenderPrompt({OutputType::kPair, true, true, true, true},
                                     "Who won?", "Team A.", "Team B.");
  EXPECT_NE(p.find("\"score_A\": <between 0 and 10"), std::string::npos) << p;
  EXPECT_NE(p.find("\"score_A\": 2"), std::string::npos) << p;
  EXPECT_NE(p.find("must be a valid JSON"), std::string::npos);
  EXPECT_NE(p.find("<|The Start of Assistant A's Answer|>"), std::string::npos);
  EXPECT_NE(p.find("square root of 81"), std::string::npos);
}

TEST(RenderPromptTest, LikertRawListsLabels) {
  const std::string p = RenderPrompt({OutputType::kLikert, true, false, false, false},
                                     "Q", "A", "B");
  EXPECT_NE(p.find("A>>B: Assistant A is significantly better"), std::string::npos) << p;
  EXPECT_NE(p.find("B>A: Assistant B is slightly better"), std::string::npos);
  EXPECT_EQ(p.find("must be a valid JSON"), std::string::npos);
  EXPECT_EQ(p.find("# Example"), std::string::npos);
}

TEST(RenderPromptTest, EightyDistinctTemplatesAndDeterministic) {
  std::set<std::string> seen;
  for (const auto& pc : AllPromptConfigs()) {
    const std::string a = RenderPrompt(pc, "instruction", "first", "second");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, RenderPrompt(pc, "instruction", "first", "second"));
    seen.insert(a);
  }
  EXPECT_EQ(seen.size(), 80u);
}

TEST(RenderPromptTest, InputsAppearVerbatim) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const std::string q = testing::RandomText(rng, 1, 50);
    const std::string a = testing::RandomText(rng, 1, 50);
    const std::string b = testing::RandomText(rng, 1, 50);
    const std::string p = RenderPrompt(testing::RandomPrompt(rng), q, a, b);
    EXPECT_NE(p.find(q), std::string::npos);
    EXPECT_NE(p.find(a), std::string::npos);
    EXPECT_NE(p.find(b), std::string::npos);
  }
}

TEST(RenderPromptTest, EmptyTextRejected) {
  const PromptConfig pc{};
  EXPECT_THROW(RenderPrompt(pc, "", "a", "b"), std::invalid_argument);
  EXPECT_THROW(RenderPrompt(pc, "q", "", "b"), std::invalid_argument);
  EXPECT_THROW(RenderPrompt(pc, "q", "a", ""), std::invalid_argument);
}

TEST(SearchSpaceTest, LoadSearchSpaceFile) {
  testing::TempDir dir("space");
  testing::WriteFile(dir.path() / "space.yaml",
                     "models:\n  - {id: small, params_b: 3}\n  - big\n"
                     "temperatures: [0.0, 1.0]\naverage_orders: [true]\n");
  const SearchSpace s = LoadSearchSpace(dir.path() / "space.yaml");
  ASSERT_EQ(s.models.size(), 2u);
  EXPECT_EQ(s.models[0].params_b, 3.0);
  EXPECT_EQ(s.models[1].served_name, "big");
  EXPECT_EQ(EnumerateConfigs(s).size(), 2u * 2u * 1u * 80u);
  EXPECT_THROW(LoadSearchSpace(dir.path() / "missing.yaml"), ConfigError);
  testing::WriteFile(dir.path() / "bad.yaml", "temperatures: [0.0]\n");
  EXPECT_THROW(LoadSearchSpace(dir.path() / "bad.yaml"), ConfigError);
}

}  // namespace
}  // namespace judgetune
