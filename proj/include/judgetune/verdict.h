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

#ifndef JUDGETUNE_VERDICT_H_
#define JUDGETUNE_VERDICT_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "judgetune/search_space.h"

namespace judgetune {

enum class LikertLabel {
  kAMuchBetter,  // A>>B
  kABetter,      // A>B
  kTie,          // A=B
  kBBetter,      // B>A
  kBMuchBetter,  // B>>A
};

std::string_view LikertLabelText(LikertLabel label);

enum class BestLetter { kA, kB };

struct PairScores {
  double score_a = 0.0;
  double score_b = 0.0;
  friend bool operator==(const PairScores&, const PairScores&) = default;
};

inline constexpr std::array<std::string_view, 5> kMultiCriteria = {
    "conciseness", "clarity", "adherence", "comprehensiveness", "style"};

// Per-assistant scores for each of kMultiCriteria, each in [0, 10].
struct MultiScores {
  std::array<double, 5> a{};
  std::array<double, 5> b{};
  friend bool operator==(const MultiScores&, const MultiScores&) = default;
};

// Preference value in [0, 1] reported directly by the judge.
struct PreferenceValue {
  double value = 0.5;
  friend bool operator==(const PreferenceValue&,
                         const PreferenceValue&) = default;
};

using VerdictPayload =
    std::variant<LikertLabel, BestLetter, PairScores, PreferenceValue,
                 MultiScores>;

// A parsed judge completion. The payload alternative always matches `kind`
// and its values are always in range; the parser never clamps.
struct Verdict {
  OutputType kind = OutputType::kPair;
  VerdictPayload payload;
  std::optional<std::string> answer;
  std::optional<std::string> explanation;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Judge preference in [0, 1]: 0 prefers the output shown as A, 1 the output
// shown as B.
class PreferenceScore {
 public:
  // Throws std::out_of_range outside [0, 1] (NaN included).
  explicit PreferenceScore(double value);
  double value() const { return value_; }
  friend bool operator==(PreferenceScore, PreferenceScore) = default;

 private:
  double value_;
};

enum class ParseErrorCode {
  kNoJsonObject,
  kInvalidJson,
  kMissingField,
  kWrongType,
  kOutOfRange,
  kUnknownLabel,
};

std::string_view ParseErrorCodeName(ParseErrorCode code);

struct ParseFailure {
  ParseErrorCode code;
  std::string detail;
};

using ParseResult = std::variant<Verdict, ParseFailure>;

// JSON mode: takes the first fenced block or bare {...} object, requires the
// verdict fields of `type` with the right JSON types, ignores unknown fields.
// Raw mode: scans `field: value` lines, field names case-insensitive, last
// occurrence wins, surrounding markdown decoration tolerated.
ParseResult ParseCompletion(OutputType type, bool use_json,
                            std::string_view completion);

// Canonical completion text for a verdict, in the same field layout the
// prompt asks for. ParseCompletion(v.kind, use_json, RenderCompletion(v,
// use_json)) returns v for any valid verdict whose aux texts are single-line.
std::string RenderCompletion(const Verdict& verdict, bool use_json);

// likert {0, .25, .5, .75, 1}; letter A -> 0, B -> 1; preference identity;
// pair b / (a + b) with 0.5 when both are zero; multi averages each side's
// criteria, then applies the pair rule.
PreferenceScore VerdictToPreference(const Verdict& verdict);

inline constexpr double kDefaultTieBand = 0.05;

// Maps a preference to {0, 0.5, 1}: within tie_band of 0.5 is a tie.
// Throws ConfigError unless 0 <= tie_band < 0.5.
double Discretize(PreferenceScore p, double tie_band = kDefaultTieBand);

// Representative verdict of `type` expressing preference `p`: the closest
// likert label, the letter on p's side (A for exact ties), pair/multi scores
// 10(1 - p) vs 10p, or p itself.
Verdict VerdictForPreference(OutputType type, double p);

}  // namespace judgetune

#endif  // JUDGETUNE_VERDICT_H_
