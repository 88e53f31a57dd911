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

#include "judgetune/dataset_io.h"

#include <gtest/gtest.h>

#include <set>

#include "judgetune/errors.h"
#include "test_support.h"

namespace judgetune {
namespace {

TEST(LoadBattlesTest, StrictAndLenient) {
  const std::string text =
      "{\"battle_id\": \"a\", \"instruction\": \"q\", \"output_a\": \"x\", \"output_b\": \"y\", "
      "\"human_label\": 0.5}\n"
      "\n"
      "{\"battle_id\": 7, \"instruction\": \"q\", \"output_a\": \"x\", \"output_b\": \"y\", "
      "\"winner\": \"model_b\", \"model_a\": \"m1\", \"model_b\": \"m2\"}\n"
      "{\"battle_id\": \"bad\", \"instruction\": \"q\", \"output_a\": \"\", \"output_b\": \"y\"}\n"
      "not json\n"
      "{\"battle_id\": \"c\", \"instruction\": \"q\", \"output_a\": \"x\", \"output_b\": \"y\", "
      "\"human_label\": 0.3}\n";
  try {
    ParseBattles(text, true);
    FAIL() << "strict parse accepted malformed input";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  const LoadResult r = ParseBattles(text, false);
  ASSERT_EQ(r.battles.size(), 2u);
  EXPECT_EQ(r.battles[0].human_label, 0.5);
  EXPECT_EQ(r.battles[1].battle_id, "7");
  EXPECT_EQ(r.battles[1].human_label, 1.0);
  EXPECT_EQ(r.battles[1].model_b, "m2");
  ASSERT_EQ(r.errors.size(), 3u);
  EXPECT_EQ(r.errors[0].line, 4u);
  EXPECT_EQ(r.errors[1].line, 5u);
  EXPECT_EQ(r.errors[2].line, 6u);
  EXPECT_THROW(LoadBattles("/nonexistent/battles.jsonl"), DataError);
}

TEST(LoadBattlesTest, ConversationFormatAndTies) {
  const std::string text =
      R"j({"battle_id": "l1", "winner": "tie (bothbad)", "model_a": "a", "model_b": "b", )j"
      R"j("conversation_a": [{"role": "user", "content": "hi"}, {"role": "assistant", "content": "hello"}], )j"
      R"j("conversation_b": [{"role": "user", "content": "hi"}, {"role": "assistant", "content": "hey"}]})j";
  const LoadResult r = ParseBattles(text);
  ASSERT_EQ(r.battles.size(), 1u);
  EXPECT_EQ(r.battles[0].instruction, "hi");
  EXPECT_EQ(r.battles[0].output_a, "hello");
  EXPECT_EQ(r.battles[0].output_b, "hey");
  EXPECT_EQ(r.battles[0].human_label, 0.5);
}

TEST(LoadBattlesTest, WriteLoadRoundTrip) {
  testing::TempDir dir("battles");
  auto battles = testing::RandomBattles(100, 41);
  battles[3].human_label.reset();
  battles[4].model_a = "x\ny";
  WriteBattles(dir.path() / "b.jsonl", battles);
  EXPECT_EQ(LoadBattles(dir.path() / "b.jsonl").battles, battles);
}

TEST(SwappedTest, Involution) {
  for (const Battle& b : testing::RandomBattles(50, 42)) {
    EXPECT_EQ(Swapped(Swapped(b)), b);
    EXPECT_EQ(*Swapped(b).human_label, 1.0 - *b.human_label);
  }
}

TEST(SplitTest, DisjointSeededAndBounded) {
  const auto battles = testing::RandomBattles(100, 43);
  const auto [val, test] = Split(battles, {60, 30, 9});
  EXPECT_EQ(val.size(), 60u);
  EXPECT_EQ(test.size(), 30u);
  std::set<std::string> ids;
  for (const auto& b : val) ids.insert(b.battle_id);
  for (const auto& b : test) ids.insert(b.battle_id);
  EXPECT_EQ(ids.size(), 90u);
  EXPECT_EQ(Split(battles, {60, 30, 9}).first, val);
  EXPECT_NE(Split(battles, {60, 30, 10}).first, val);
  EXPECT_THROW(Split(battles, {60, 41, 9}), ConfigError);
}

TEST(QualityTest, ParseMarker) {
  EXPECT_EQ(ParseCriteriaSatisfied("blah\nCriteria Satisfied: [1, 3, 5]"),
            (std::set<int>{1, 3, 5}));
  EXPECT_EQ(ParseCriteriaSatisfied("Criteria Satisfied: [1]\nCriteria Satisfied: [2, 4]"),
            (std::set<int>{2, 4}));
  EXPECT_EQ(ParseCriteriaSatisfied("Criteria Satisfied: []"), std::set<int>{});
  EXPECT_FALSE(ParseCriteriaSatisfied("no marker"));
  EXPECT_FALSE(ParseCriteriaSatisfied("Criteria Satisfied: [1, 8]"));
  EXPECT_FALSE(ParseCriteriaSatisfied("Criteria Satisfied: [1, x]"));
  EXPECT_FALSE(ParseCriteriaSatisfied("Criteria Satisfied: 1, 2"));
}

TEST(QualityTest, KeepRuleOverAllSubsets) {
  for (int mask = 0; mask < 128; ++mask) {
    std::set<int> c;
    for (int i = 0; i < 7; ++i) {
      if (mask & (1 << i)) c.insert(i + 1);
    }
    const QualityJudgement j = JudgeQuality("x", c);
    EXPECT_EQ(j.score, static_cast<int>(c.size()));
    EXPECT_EQ(j.keep, c.size() >= 5 && c.count(1) == 1);
  }
}

TEST(QualityTest, PromptContainsInstruction) {
  const std::string p = RenderQualityPrompt("Write a haiku about rain.");
  EXPECT_NE(p.find("Write a haiku about rain."), std::string::npos);
  EXPECT_NE(p.find("Criteria Satisfied"), std::string::npos);
}

TEST(QualityTest, FilterWithSimulatedRater) {
  SimulationParams p;
  p.noise_seed = 4;
  SimulatedBackend backend(p);
  const auto battles = testing::RandomBattles(40, 44);
  const auto out = QualityFilter(battles, backend, {});
  ASSERT_EQ(out.size(), battles.size());
  for (size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].battle_id, battles[i].battle_id);
    EXPECT_TRUE(out[i].ratable);
    EXPECT_EQ(out[i].keep, out[i].score >= 5 && out[i].satisfied_criteria.count(1) == 1);
  }
  EXPECT_EQ(QualityFilter(battles, backend, {}).size(), out.size());
  EXPECT_NE(QualityJudgementToJson(out[0]).find("\"keep\""), std::string::npos);
}

}  // namespace
}  // namespace judgetune
