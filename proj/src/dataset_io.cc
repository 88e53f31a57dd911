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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "judgetune/errors.h"
#include "judgetune/rng.h"

namespace judgetune {
namespace {

using json = nlohmann::json;

constexpr std::string_view kQualityPrompt =
    "Your task is to evaluate how well the following input prompts can assess "
    "the capabilities of advanced AI assistants. For the input prompt, please "
    "analyze it based on the following 7 criteria. For each criteria, make "
    "sure to explain before determine whether the input satisfy it.\n"
    "\n"
    "1. Specificity: Does the prompt ask for a specific, well-defined output "
    "without leaving any ambiguity? This allows the AI to demonstrate its "
    "ability to follow instructions and generate a precise, targeted "
    "response.\n"
    "\n"
    "2. Domain Knowledge: Does the prompt test the AI’s knowledge and "
    "understanding in a specific domain or set of domains? The prompt must "
    "demand the AI to have a strong prior knowledge or mastery of "
    "domainspecific concepts, theories, or principles.\n"
    "\n"
    "3. Complexity: Does the prompt have multiple components, variables, or "
    "levels of depth and nuance? This assesses the AI’s capability to "
    "handle complex, multi-faceted problems beyond simple queries.\n"
    "\n"
    "4. Problem-Solving: Does the prompt require active problem-solving: "
    "analyzing and clearly defining the problem and systematically devising "
    "and implementing a solution? Note active problem-solving is not simply "
    "reciting facts or following a fixed set of instructions.\n"
    "\n"
    "5. Creativity: Does the prompt require a creative approach or solution? "
    "This tests the AI’s ability to generate novel ideas tailored to the "
    "specific needs of the request or problem at hand.\n"
    "\n"
    "6. Technical Accuracy: Does the prompt require an answer with a high "
    "degree of technical accuracy, correctness and precision? This assesses "
    "the reliability and truthfulness of the AI’s outputs.\n"
    "\n"
    "7. Real-World Application: Does the prompt relate to real-world "
    "applications? This tests the AI’s ability to provide practical and "
    "actionable information that could be implemented in real-life "
    "scenarios.\n"
    "\n"
    "After analyzing the input prompt based on these criteria, you must list "
    "the criteria numbers that the prompt satisfies in the format of a Python "
    "array. For example, \"Criteria Satisfied: [1, 2, 4, 6, 7]\".\n";

std::string FirstTurn(const json& conversation, std::string_view role) {
  if (!conversation.is_array()) return {};
  for (const auto& msg : conversation) {
    if (msg.is_object() && msg.value("role", "") == role &&
        msg.contains("content") && msg["content"].is_string()) {
      return msg["content"].get<std::string>();
    }
  }
  return {};
}

std::optional<std::string> OptionalString(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) {
    throw DataError(std::string("field '") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

Battle BattleFromJson(const json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  Battle b;
  if (!j.contains("battle_id")) throw DataError("missing field 'battle_id'");
  const json& id = j["battle_id"];
  if (id.is_string()) {
    b.battle_id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    b.battle_id = std::to_string(id.get<int64_t>());
  } else {
    throw DataError("battle_id must be a string or integer");
  }
  if (b.battle_id.empty()) throw DataError("battle_id is empty");

  auto text = [&](const char* key) { return OptionalString(j, key).value_or(""); };
  b.instruction = text("instruction");
  b.output_a = text("output_a");
  b.output_b = text("output_b");
  if (j.contains("conversation_a")) {
    if (b.instruction.empty()) b.instruction = FirstTurn(j["conversation_a"], "user");
    if (b.output_a.empty()) b.output_a = FirstTurn(j["conversation_a"], "assistant");
  }
  if (j.contains("conversation_b") && b.output_b.empty()) {
    b.output_b = FirstTurn(j["conversation_b"], "assistant");
  }
  if (b.instruction.empty()) throw DataError("missing field 'instruction'");
  if (b.output_a.empty()) throw DataError("missing or empty 'output_a'");
  if (b.output_b.empty()) throw DataError("missing or empty 'output_b'");

  if (j.contains("human_label") && !j["human_label"].is_null()) {
    if (!j["human_label"].is_number()) {
      throw DataError("human_label must be a number");
    }
    const double label = j["human_label"].get<double>();
    if (!IsValidLabel(label)) throw DataError("human_label must be 0, 0.5 or 1");
    b.human_label = label;
  } else if (auto winner = OptionalString(j, "winner")) {
    if (*winner == "model_a") {
      b.human_label = 0.0;
    } else if (*winner == "model_b") {
      b.human_label = 1.0;
    } else if (winner->rfind("tie", 0) == 0) {
      b.human_label = 0.5;
    } else {
      throw DataError("unknown winner '" + *winner + "'");
    }
  }
  b.model_a = OptionalString(j, "model_a");
  b.model_b = OptionalString(j, "model_b");
  return b;
}

}  // namespace

Battle Swapped(const Battle& battle) {
  Battle s = battle;
  std::swap(s.output_a, s.output_b);
  std::swap(s.model_a, s.model_b);
  if (s.human_label) s.human_label = 1.0 - *s.human_label;
  return s;
}

bool IsValidLabel(double label) {
  return label == 0.0 || label == 0.5 || label == 1.0;
}

LoadResult ParseBattles(std::string_view ndjson, bool strict) {
  LoadResult result;
  size_t pos = 0;
  size_t lineno = 0;
  while (pos < ndjson.size()) {
    size_t end = ndjson.find('\n', pos);
    if (end == std::string_view::npos) end = ndjson.size();
    std::string_view line = ndjson.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      result.battles.push_back(BattleFromJson(j));
    } catch (const std::exception& e) {
      if (strict) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
      }
      result.errors.push_back({lineno, e.what()});
    }
  }
  return result;
}

LoadResult LoadBattles(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open battle file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ParseBattles(ss.str(), strict);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string BattleToJson(const Battle& b) {
  json j = json::object();
  j["battle_id"] = b.battle_id;
  j["instruction"] = b.instruction;
  j["output_a"] = b.output_a;
  j["output_b"] = b.output_b;
  j["human_label"] = b.human_label ? json(*b.human_label) : json(nullptr);
  j["model_a"] = b.model_a ? json(*b.model_a) : json(nullptr);
  j["model_b"] = b.model_b ? json(*b.model_b) : json(nullptr);
  return j.dump();
}

void WriteBattles(const std::filesystem::path& path,
                  const std::vector<Battle>& battles) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& b : battles) out << BattleToJson(b) << '\n';
}

std::pair<std::vector<Battle>, std::vector<Battle>> Split(
    const std::vector<Battle>& battles, const SplitSpec& spec) {
  if (spec.validation_count + spec.test_count > battles.size()) {
    throw ConfigError("split asks for " +
                      std::to_string(spec.validation_count + spec.test_count) +
                      " battles but the dataset has " +
                      std::to_string(battles.size()));
  }
  std::vector<size_t> order(battles.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.Shuffle(order);
  std::pair<std::vector<Battle>, std::vector<Battle>> out;
  out.first.reserve(spec.validation_count);
  out.second.reserve(spec.test_count);
  for (size_t i = 0; i < spec.validation_count; ++i) {
    out.first.push_back(battles[order[i]]);
  }
  for (size_t i = 0; i < spec.test_count; ++i) {
    out.second.push_back(battles[order[spec.validation_count + i]]);
  }
  return out;
}

std::string RenderQualityPrompt(std::string_view instruction) {
  std::string out(kQualityPrompt);
  out += "\n<|User Prompt|>\n";
  out += instruction;
  out += "\n";
  return out;
}

std::optional<std::set<int>> ParseCriteriaSatisfied(
    std::string_view completion) {
  static const std::regex kMarker(R"(Criteria Satisfied:\s*\[([^\]]*)\])",
                                  std::regex::icase);
  const std::string text(completion);
  std::optional<std::string> inner;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kMarker);
       it != std::sregex_iterator(); ++it) {
    inner = (*it)[1].str();
  }
  if (!inner) return std::nullopt;
  std::set<int> criteria;
  std::stringstream ss(*inner);
  for (std::string item; std::getline(ss, item, ',');) {
    const size_t b = item.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
      if (criteria.empty() && ss.eof()) break;  // "[]"
      return std::nullopt;
    }
    const size_t e = item.find_last_not_of(" \t\r\n");
    const std::string tok = item.substr(b, e - b + 1);
    if (tok.size() != 1 || tok[0] < '1' || tok[0] > '7') return std::nullopt;
    criteria.insert(tok[0] - '0');
  }
  return criteria;
}

QualityJudgement JudgeQuality(std::string battle_id, std::set<int> criteria) {
  QualityJudgement q;
  q.battle_id = std::move(battle_id);
  q.score = static_cast<int>(criteria.size());
  q.keep = q.score >= 5 && criteria.count(1) > 0;
  q.satisfied_criteria = std::move(criteria);
  return q;
}

std::vector<QualityJudgement> QualityFilter(
    const std::vector<Battle>& battles, ChatBackend& backend,
    const QualityFilterOptions& options) {
  std::vector<QualityJudgement> out;
  out.reserve(battles.size());
  for (const auto& b : battles) {
    ChatRequest req;
    req.model = options.rater_model;
    req.prompt = RenderQualityPrompt(b.instruction);
    req.temperature = options.temperature;
    req.context = QualityContext{b.battle_id};
    std::string last;
    std::optional<std::set<int>> parsed;
    for (int attempt = 0; attempt <= options.max_retries && !parsed; ++attempt) {
      req.attempt = attempt;
      last = backend.Complete(req).content;
      parsed = ParseCriteriaSatisfied(last);
    }
    if (parsed) {
      QualityJudgement q = JudgeQuality(b.battle_id, *parsed);
      q.completion = last;
      out.push_back(std::move(q));
    } else {
      QualityJudgement q;
      q.battle_id = b.battle_id;
      q.ratable = false;
      q.completion = last;
      out.push_back(std::move(q));
    }
  }
  return out;
}

std::string QualityJudgementToJson(const QualityJudgement& q) {
  json j = json::object();
  j["battle_id"] = q.battle_id;
  j["ratable"] = q.ratable;
  j["satisfied_criteria"] = q.satisfied_criteria;
  j["score"] = q.score;
  j["keep"] = q.keep;
  return j.dump();
}

}  // namespace judgetune
