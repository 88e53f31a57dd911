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

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "judgetune/errors.h"

namespace judgetune {
namespace {

using json = nlohmann::json;

// Bound on candidate '{' positions tried when looking for a JSON object.
constexpr int kMaxJsonCandidates = 64;

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool IsFieldChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

// Strips markdown emphasis, code ticks, quotes and trailing commas.
std::string_view StripDecoration(std::string_view s) {
  s = Trim(s);
  constexpr std::string_view kDecor = "*`\"'_";
  while (!s.empty() && kDecor.find(s.front()) != std::string_view::npos) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (kDecor.find(s.back()) != std::string_view::npos ||
                        s.back() == ',')) {
    s.remove_suffix(1);
  }
  return Trim(s);
}

std::string FormatNumber(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return json(v).dump();
}

ParseFailure Fail(ParseErrorCode code, std::string detail) {
  return ParseFailure{code, std::move(detail)};
}

std::optional<LikertLabel> ParseLikert(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '[' && c != ']') {
      s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  static const std::map<std::string, LikertLabel, std::less<>> kLabels = {
      {"A>>B", LikertLabel::kAMuchBetter}, {"B<<A", LikertLabel::kAMuchBetter},
      {"A>B", LikertLabel::kABetter},      {"B<A", LikertLabel::kABetter},
      {"A=B", LikertLabel::kTie},          {"B=A", LikertLabel::kTie},
      {"B>A", LikertLabel::kBBetter},      {"A<B", LikertLabel::kBBetter},
      {"B>>A", LikertLabel::kBMuchBetter}, {"A<<B", LikertLabel::kBMuchBetter},
  };
  auto it = kLabels.find(s);
  if (it == kLabels.end()) return std::nullopt;
  return it->second;
}

std::optional<BestLetter> ParseLetter(std::string_view text) {
  const std::string s = Lower(StripDecoration(text));
  if (s == "a" || s == "assistant a") return BestLetter::kA;
  if (s == "b" || s == "assistant b") return BestLetter::kB;
  return std::nullopt;
}

// Field lookup abstracted over JSON objects and raw `field: value` maps.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  virtual bool Has(std::string_view name) const = 0;
  // Numeric value; nullopt signals a type mismatch.
  virtual std::optional<double> Number(std::string_view name) const = 0;
  // Textual value; nullopt signals a type mismatch.
  virtual std::optional<std::string> Text(std::string_view name) const = 0;
  // Any value rendered as text (aux fields accept every type).
  virtual std::string AnyText(std::string_view name) const = 0;
};

class JsonFields : public FieldSource {
 public:
  explicit JsonFields(const json& obj) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      fields_.emplace(Lower(it.key()), &it.value());
    }
  }
  bool Has(std::string_view name) const override {
    return fields_.count(Lower(name)) > 0;
  }
  std::optional<double> Number(std::string_view name) const override {
    const json& v = *fields_.at(Lower(name));
    if (!v.is_number()) return std::nullopt;
    return v.get<double>();
  }
  std::optional<std::string> Text(std::string_view name) const override {
    const json& v = *fields_.at(Lower(name));
    if (!v.is_string()) return std::nullopt;
    return v.get<std::string>();
  }
  std::string AnyText(std::string_view name) const override {
    const json& v = *fields_.at(Lower(name));
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

 private:
  std::map<std::string, const json*, std::less<>> fields_;
};

class RawFields : public FieldSource {
 public:
  explicit RawFields(std::string_view text) {
    size_t pos = 0;
    while (pos <= text.size()) {
      size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      AddLine(text.substr(pos, end - pos));
      pos = end + 1;
    }
  }
  bool Has(std::string_view name) const override {
    return fields_.count(Lower(name)) > 0;
  }
  std::optional<double> Number(std::string_view name) const override {
    const std::string& s = fields_.at(Lower(name));
    double v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
    return v;
  }
  std::optional<std::string> Text(std::string_view name) const override {
    return fields_.at(Lower(name));
  }
  std::string AnyText(std::string_view name) const override {
    return fields_.at(Lower(name));
  }

 private:
  void AddLine(std::string_view line) {
    line = Trim(line);
    // Leading decoration such as "- ", "## ", "**" or backticks.
    while (!line.empty() && !IsFieldChar(line.front())) line.remove_prefix(1);
    const size_t colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) return;
    std::string_view name = line.substr(0, colon);
    while (!name.empty() && !IsFieldChar(name.back())) name.remove_suffix(1);
    if (name.empty()) return;
    for (char c : name) {
      if (!IsFieldChar(c)) return;
    }
    fields_[Lower(name)] = std::string(StripDecoration(line.substr(colon + 1)));
  }

  std::map<std::string, std::string, std::less<>> fields_;
};

std::variant<double, ParseFailure> RequireScore(const FieldSource& src,
                                                std::string_view name,
                                                double hi) {
  if (!src.Has(name)) {
    return Fail(ParseErrorCode::kMissingField, std::string(name));
  }
  const auto v = src.Number(name);
  if (!v) return Fail(ParseErrorCode::kWrongType, std::string(name));
  if (!std::isfinite(*v) || *v < 0.0 || *v > hi) {
    return Fail(ParseErrorCode::kOutOfRange,
                std::string(name) + "=" + FormatNumber(*v));
  }
  return *v;
}

ParseResult ExtractVerdict(OutputType type, const FieldSource& src) {
  Verdict v;
  v.kind = type;
  switch (type) {
    case OutputType::kLikert: {
      if (!src.Has("score")) return Fail(ParseErrorCode::kMissingField, "score");
      const auto text = src.Text("score");
      if (!text) return Fail(ParseErrorCode::kWrongType, "score");
      const auto label = ParseLikert(*text);
      if (!label) return Fail(ParseErrorCode::kUnknownLabel, *text);
      v.payload = *label;
      break;
    }
    case OutputType::kBestModelIdentifier: {
      if (!src.Has("best_model")) {
        return Fail(ParseErrorCode::kMissingField, "best_model");
      }
      const auto text = src.Text("best_model");
      if (!text) return Fail(ParseErrorCode::kWrongType, "best_model");
      const auto letter = ParseLetter(*text);
      if (!letter) return Fail(ParseErrorCode::kUnknownLabel, *text);
      v.payload = *letter;
      break;
    }
    case OutputType::kPair: {
      auto a = RequireScore(src, "score_A", 10.0);
      if (auto* f = std::get_if<ParseFailure>(&a)) return *f;
      auto b = RequireScore(src, "score_B", 10.0);
      if (auto* f = std::get_if<ParseFailure>(&b)) return *f;
      v.payload = PairScores{std::get<double>(a), std::get<double>(b)};
      break;
    }
    case OutputType::kPreference: {
      auto p = RequireScore(src, "preference", 1.0);
      if (auto* f = std::get_if<ParseFailure>(&p)) return *f;
      v.payload = PreferenceValue{std::get<double>(p)};
      break;
    }
    case OutputType::kMulti: {
      MultiScores scores;
      for (size_t i = 0; i < kMultiCriteria.size(); ++i) {
        const std::string base(kMultiCriteria[i]);
        auto a = RequireScore(src, base + "_A", 10.0);
        if (auto* f = std::get_if<ParseFailure>(&a)) return *f;
        auto b = RequireScore(src, base + "_B", 10.0);
        if (auto* f = std::get_if<ParseFailure>(&b)) return *f;
        scores.a[i] = std::get<double>(a);
        scores.b[i] = std::get<double>(b);
      }
      v.payload = scores;
      break;
    }
  }
  if (src.Has("answer")) v.answer = src.AnyText("answer");
  if (src.Has("explanation")) v.explanation = src.AnyText("explanation");
  return v;
}

// End of the balanced object starting at text[start] == '{', or npos.
size_t MatchBrace(std::string_view text, size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

ParseResult ParseJson(OutputType type, std::string_view completion) {
  size_t pos = completion.find('{');
  if (pos == std::string_view::npos) {
    return Fail(ParseErrorCode::kNoJsonObject, "no '{' in completion");
  }
  for (int tries = 0; pos != std::string_view::npos && tries < kMaxJsonCandidates;
       ++tries, pos = completion.find('{', pos + 1)) {
    const size_t end = MatchBrace(completion, pos);
    if (end == std::string_view::npos) continue;
    const json j = json::parse(completion.substr(pos, end - pos + 1), nullptr,
                               /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) continue;
    return ExtractVerdict(type, JsonFields(j));
  }
  return Fail(ParseErrorCode::kInvalidJson, "no parseable JSON object");
}

double PairRule(double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.5;
  return b / (a + b);
}

}  // namespace

std::string_view LikertLabelText(LikertLabel label) {
  switch (label) {
    case LikertLabel::kAMuchBetter:
      return "A>>B";
    case LikertLabel::kABetter:
      return "A>B";
    case LikertLabel::kTie:
      return "A=B";
    case LikertLabel::kBBetter:
      return "B>A";
    case LikertLabel::kBMuchBetter:
      return "B>>A";
  }
  return "?";
}

std::string_view ParseErrorCodeName(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::kNoJsonObject:
      return "no_json_object";
    case ParseErrorCode::kInvalidJson:
      return "invalid_json";
    case ParseErrorCode::kMissingField:
      return "missing_field";
    case ParseErrorCode::kWrongType:
      return "wrong_type";
    case ParseErrorCode::kOutOfRange:
      return "out_of_range";
    case ParseErrorCode::kUnknownLabel:
      return "unknown_label";
  }
  return "unknown";
}

PreferenceScore::PreferenceScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::out_of_range("preference score outside [0, 1]");
  }
}

ParseResult ParseCompletion(OutputType type, bool use_json,
                            std::string_view completion) {
  if (use_json) return ParseJson(type, completion);
  return ExtractVerdict(type, RawFields(completion));
}

std::string RenderCompletion(const Verdict& v, bool use_json) {
  std::vector<std::pair<std::string, std::string>> fields;  // name, literal
  auto text = [&](const std::string& s) {
    return use_json ? json(s).dump() : s;
  };
  if (v.answer) fields.emplace_back("answer", text(*v.answer));
  if (v.explanation) fields.emplace_back("explanation", text(*v.explanation));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LikertLabel>) {
          fields.emplace_back("score", text(std::string(LikertLabelText(p))));
        } else if constexpr (std::is_same_v<T, BestLetter>) {
          fields.emplace_back("best_model", text(p == BestLetter::kA ? "A" : "B"));
        } else if constexpr (std::is_same_v<T, PairScores>) {
          fields.emplace_back("score_A", FormatNumber(p.score_a));
          fields.emplace_back("score_B", FormatNumber(p.score_b));
        } else if constexpr (std::is_same_v<T, PreferenceValue>) {
          fields.emplace_back("preference", FormatNumber(p.value));
        } else {
          for (size_t i = 0; i < kMultiCriteria.size(); ++i) {
            const std::string base(kMultiCriteria[i]);
            fields.emplace_back(base + "_A", FormatNumber(p.a[i]));
            fields.emplace_back(base + "_B", FormatNumber(p.b[i]));
          }
        }
      },
      v.payload);

  std::string out;
  if (use_json) {
    out = "{\n";
    for (size_t i = 0; i < fields.size(); ++i) {
      out += "  \"" + fields[i].first + "\": " + fields[i].second;
      out += i + 1 < fields.size() ? ",\n" : "\n";
    }
    out += "}";
  } else {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += "\n";
      out += fields[i].first + ": " + fields[i].second;
    }
  }
  return out;
}

PreferenceScore VerdictToPreference(const Verdict& v) {
  return std::visit(
      [](const auto& p) -> PreferenceScore {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LikertLabel>) {
          return PreferenceScore(0.25 * static_cast<int>(p));
        } else if constexpr (std::is_same_v<T, BestLetter>) {
          return PreferenceScore(p == BestLetter::kA ? 0.0 : 1.0);
        } else if constexpr (std::is_same_v<T, PairScores>) {
          return PreferenceScore(PairRule(p.score_a, p.score_b));
        } else if constexpr (std::is_same_v<T, PreferenceValue>) {
          return PreferenceScore(p.value);
        } else {
          double a = 0, b = 0;
          for (size_t i = 0; i < p.a.size(); ++i) {
            a += p.a[i];
            b += p.b[i];
          }
          const double n = static_cast<double>(p.a.size());
          return PreferenceScore(PairRule(a / n, b / n));
        }
      },
      v.payload);
}

double Discretize(PreferenceScore p, double tie_band) {
  if (!(tie_band >= 0.0 && tie_band < 0.5)) {
    throw ConfigError("tie_band must satisfy 0 <= tie_band < 0.5");
  }
  const double x = p.value();
  if (x < 0.5 - tie_band) return 0.0;
  if (x > 0.5 + tie_band) return 1.0;
  return 0.5;
}

Verdict VerdictForPreference(OutputType type, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::out_of_range("VerdictForPreference: p outside [0, 1]");
  }
  Verdict v;
  v.kind = type;
  switch (type) {
    case OutputType::kLikert:
      v.payload = static_cast<LikertLabel>(
          std::clamp(static_cast<int>(std::lround(p * 4.0)), 0, 4));
      break;
    case OutputType::kBestModelIdentifier:
      v.payload = p > 0.5 ? BestLetter::kB : BestLetter::kA;
      break;
    case OutputType::kPair:
      v.payload = PairScores{10.0 * (1.0 - p), 10.0 * p};
      break;
    case OutputType::kPreference:
      v.payload = PreferenceValue{p};
      break;
    case OutputType::kMulti: {
      MultiScores s;
      s.a.fill(10.0 * (1.0 - p));
      s.b.fill(10.0 * p);
      v.payload = s;
      break;
    }
  }
  return v;
}

}  // namespace judgetune
