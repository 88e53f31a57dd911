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

#include "judgetune/verdict.h"

#include <gtest/gtest.h>

#include "judgetune/errors.h"
#include "test_support.h"

namespace judgetune {
namespace {

template <typename T>
T PayloadOf(const ParseResult& r) {
  const auto* v = std::get_if<Verdict>(&r);
  EXPECT_NE(v, nullptr) << "parse failed: "
                        << (v ? "" : std::get<ParseFailure>(r).detail);
  return v ? std::get<T>(v->payload) : T{};
}

ParseErrorCode FailureOf(const ParseResult& r) {
  const auto* f = std::get_if<ParseFailure>(&r);
  EXPECT_NE(f, nullptr);
  return f ? f->code : ParseErrorCode{};
}

TEST(ParseCompletionTest, PairJson) {
  const auto p = PayloadOf<PairScores>(
      ParseCompletion(OutputType::kPair, true, R"({"score_A": 2, "score_B": 8})"));
  EXPECT_EQ(p.score_a, 2.0);
  EXPECT_EQ(p.score_b, 8.0);
}

TEST(ParseCompletionTest, LikertRawTie) {
  EXPECT_EQ(PayloadOf<LikertLabel>(ParseCompletion(OutputType::kLikert, false, "score: A=B")),
            LikertLabel::kTie);
}

TEST(ParseCompletionTest, OutOfRangeIsFailure) {
  EXPECT_EQ(FailureOf(ParseCompletion(OutputType::kPair, true,
                                      R"({"score_A": 11, "score_B": 3})")),
            ParseErrorCode::kOutOfRange);
  EXPECT_EQ(FailureOf(ParseCompletion(OutputType::kPreference, true, R"({"preference": 1.5})")),
            ParseErrorCode::kOutOfRange);
}

TEST(ParseCompletionTest, ReasonCodes) {
  EXPECT_EQ(FailureOf(ParseCompletion(OutputType::kPair, true, "no braces here")),
            ParseErrorCode::kNoJsonObject);
  EXPECT_EQ(FailureOf(ParseCompletion(OutputType::kPair, true, R"({"score_A": 2})")),
            ParseErrorCode::kMissingField);
  EXPECT_EQ(FailureOf(ParseCompletion(OutputType::kPair, true,
                                      R"({"score_A": "2", "score_B": 3})")),
            ParseErrorCode::kWrongType);
  EXPECT_EQ(FailureOf(ParseCompletion(OutputType::kLikert, true, R"({"score": "A>>>B"})")),
            ParseErrorCode::kUnknownLabel);
  EXPECT_EQ(FailureOf(ParseCompletion(OutputType::kLikert, false, "nothing")),
            ParseErrorCode::kMissingField);
}

TEST(ParseCompletionTest, FencedJsonWithNoiseAndExtraFields) {
  const std::string text =
      "Sure! Here is my verdict:\n```json\n{\"answer\": \"x\", \"best_model\": \"B\", "
      "\"unused\": [1, {\"a\": 2}]}\n```\nThanks";
  EXPECT_EQ(PayloadOf<BestLetter>(ParseCompletion(OutputType::kBestModelIdentifier, true, text)),
            BestLetter::kB);
}

TEST(ParseCompletionTest, RawLastOccurrenceWinsAndCaseInsensitive) {
  const std::string text = "**Preference**: 0.2\nsome text\n`PREFERENCE: 0.7`\n";
  EXPECT_EQ(PayloadOf<PreferenceValue>(ParseCompletion(OutputType::kPreference, false, text)).value,
            0.7);
}

TEST(ParseCompletionTest, LikertAliases) {
  EXPECT_EQ(PayloadOf<LikertLabel>(ParseCompletion(OutputType::kLikert, false, "score: A<<B")),
            LikertLabel::kBMuchBetter);
  EXPECT_EQ(PayloadOf<LikertLabel>(ParseCompletion(OutputType::kLikert, false, "score: A<B")),
            LikertLabel::kBBetter);
}

TEST(VerdictToPreferenceTest, Mappings) {
  auto pref = [](VerdictPayload payload, OutputType kind) {
    Verdict v;
    v.kind = kind;
    v.payload = payload;
    return VerdictToPreference(v).value();
  };
  EXPECT_EQ(pref(LikertLabel::kAMuchBetter, OutputType::kLikert), 0.0);
  EXPECT_EQ(pref(LikertLabel::kABetter, OutputType::kLikert), 0.25);
  EXPECT_EQ(pref(LikertLabel::kTie, OutputType::kLikert), 0.5);
  EXPECT_EQ(pref(LikertLabel::kBBetter, OutputType::kLikert), 0.75);
  EXPECT_EQ(pref(LikertLabel::kBMuchBetter, OutputType::kLikert), 1.0);
  EXPECT_EQ(pref(BestLetter::kA, OutputType::kBestModelIdentifier), 0.0);
  EXPECT_EQ(pref(BestLetter::kB, OutputType::kBestModelIdentifier), 1.0);
  EXPECT_EQ(pref(PreferenceValue{0.3}, OutputType::kPreference), 0.3);
  EXPECT_DOUBLE_EQ(pref(PairScores{2, 8}, OutputType::kPair), 0.8);
  EXPECT_EQ(pref(PairScores{0, 0}, OutputType::kPair), 0.5);
  MultiScores m;
  m.a = {2, 2, 2, 2, 2};
  m.b = {6, 8, 8, 8, 10};
  EXPECT_DOUBLE_EQ(pref(m, OutputType::kMulti), 8.0 / 10.0);
}

TEST(VerdictToPreferenceTest, SwapSymmetry) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.Uniform01() * 10, b = rng.Uniform01() * 10;
    Verdict v{OutputType::kPair, PairScores{a, b}, {}, {}};
    Verdict w{OutputType::kPair, PairScores{b, a}, {}, {}};
    EXPECT_NEAR(VerdictToPreference(w).value(), 1.0 - VerdictToPreference(v).value(), 1e-12);
  }
  for (int l = 0; l < 5; ++l) {
    Verdict v{OutputType::kLikert, static_cast<LikertLabel>(l), {}, {}};
    Verdict w{OutputType::kLikert, static_cast<LikertLabel>(4 - l), {}, {}};
    EXPECT_EQ(VerdictToPreference(w).value(), 1.0 - VerdictToPreference(v).value());
  }
}

TEST(DiscretizeTest, ThresholdRule) {
  EXPECT_EQ(Discretize(PreferenceScore(0.5), 0.05), 0.5);
  EXPECT_EQ(Discretize(PreferenceScore(0.8), 0.05), 1.0);
  EXPECT_EQ(Discretize(PreferenceScore(0.0), 0.05), 0.0);
  EXPECT_EQ(Discretize(PreferenceScore(0.6), 0.05), 1.0);
  EXPECT_EQ(Discretize(PreferenceScore(0.54), 0.05), 0.5);
  EXPECT_THROW(Discretize(PreferenceScore(0.5), 0.5), ConfigError);
  EXPECT_THROW(Discretize(PreferenceScore(0.5), -0.1), ConfigError);
}

TEST(DiscretizeTest, Monotone) {
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.Uniform01(), y = rng.Uniform01();
    const double band = rng.Uniform01() * 0.49;
    EXPECT_LE(Discretize(PreferenceScore(std::min(x, y)), band),
              Discretize(PreferenceScore(std::max(x, y)), band));
  }
}

TEST(PreferenceScoreTest, RangeChecked) {
  EXPECT_THROW(PreferenceScore(-0.01), std::out_of_range);
  EXPECT_THROW(PreferenceScore(1.01), std::out_of_range);
  EXPECT_NO_THROW(PreferenceScore(1.0));
}

TEST(RoundTripTest, AllTemplatesRandomVerdicts) {
  Rng rng(5);
  for (const auto& p : AllPromptConfigs()) {
    for (int i = 0; i < 50; ++i) {
      const Verdict v = testing::RandomVerdict(p, rng);
      const ParseResult r = ParseCompletion(p.output_type, p.use_json, RenderCompletion(v, p.use_json));
      ASSERT_TRUE(std::holds_alternative<Verdict>(r)) << RenderCompletion(v, p.use_json);
      EXPECT_EQ(std::get<Verdict>(r), v);
    }
  }
}

TEST(RoundTripTest, VerdictForPreferenceIsInverseOnGrid) {
  for (OutputType t : kAllOutputTypes) {
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Verdict v = VerdictForPreference(t, p);
      if (t == OutputType::kBestModelIdentifier && p != 0.0 && p != 1.0) continue;
      EXPECT_NEAR(VerdictToPreference(v).value(), p, 1e-12) << OutputTypeName(t) << " " << p;
    }
  }
}

TEST(FuzzTest, NeverThrowsNeverOutOfRange) {
  Rng rng(6);
  for (int i = 0; i < 20000; ++i) {
    const PromptConfig p = testing::RandomPrompt(rng);
    const std::string text = testing::RandomText(rng, 0, 200);
    ParseResult r;
    ASSERT_NO_THROW(r = ParseCompletion(p.output_type, p.use_json, text));
    if (const auto* v = std::get_if<Verdict>(&r)) EXPECT_TRUE(testing::VerdictInRange(*v));
  }
}

}  // namespace
}  // namespace judgetune
