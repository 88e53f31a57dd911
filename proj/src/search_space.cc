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

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "judgetune/errors.h"
#include "judgetune/rng.h"
#include "judgetune/verdict.h"

namespace judgetune {
namespace {

using json = nlohmann::json;

constexpr std::string_view kPreamble =
    "You are a highly efficient assistant, who evaluates and selects the best "
    "large language model based on the quality of their responses to a given "
    "instruction.\n"
    "You will be shown one instruction and the output of Assistant A and "
    "Assistant B and will have to decide which one was best.\n"
    "Make sure to not over-confidently prefer one assistant or the other and "
    "also make sure to not bias your preference based on the ordering or on "
    "the length of the answers.\n";

constexpr std::string_view kExampleInstruction =
    "What is the square root of 81? Just provide the answer.";
constexpr std::string_view kExampleOutputA =
    "The answer is 9, this can be seen as 9*9 = 81.";
constexpr std::string_view kExampleOutputB = "9";
constexpr std::string_view kExampleAnswer = "9";
constexpr std::string_view kExampleExplanation =
    "Both models are correct, however the output from model A is verbose and "
    "does not provide just the answer whereas the instruction asked for "
    "conciseness.";

constexpr std::string_view kLikertChoices =
    "The \"score\" value should indicate your preference for the assistant. "
    "You must output only one of the following choices as your final verdict "
    "with a label:\n"
    "\n"
    "A>>B: Assistant A is significantly better\n"
    "A>B: Assistant A is slightly better\n"
    "A=B: Tie, relatively the same\n"
    "B>A: Assistant B is slightly better\n"
    "B>>A: Assistant B is significantly better\n";

struct FieldSpec {
  std::string name;
  std::string json_hint;
  std::string raw_hint;
};

std::vector<FieldSpec> VerdictFields(OutputType type) {
  switch (type) {
    case OutputType::kLikert:
      return {{"score",
               "<one of \"A>>B\", \"A>B\", \"A=B\", \"B>A\", \"B>>A\", see "
               "instruction below>",
               "<one of A>>B, A>B, A=B, B>A, B>>A, see instruction below>"}};
    case OutputType::kBestModelIdentifier:
      return {{"best_model",
               "<\"A\" or \"B\", the letter of the assistant with the best "
               "answer>",
               "<A or B, the letter of the assistant with the best answer>"}};
    case OutputType::kPair:
      return {{"score_A", "<between 0 and 10 to rate the quality of A>",
               "<between 0 and 10 to rate the quality of A>"},
              {"score_B", "<between 0 and 10 to rate the quality of B>",
               "<between 0 and 10 to rate the quality of B>"}};
    case OutputType::kPreference: {
      const std::string hint =
          "<a number between 0 and 1, where 0 means A is better and 1 means "
          "B is better>";
      return {{"preference", hint, hint}};
    }
    case OutputType::kMulti: {
      std::vector<FieldSpec> fields;
      for (std::string_view criterion : kMultiCriteria) {
        for (char side : {'A', 'B'}) {
          std::string hint = "<between 0 and 10 to rate the ";
          hint += criterion;
          hint += " of ";
          hint += side;
          hint += ">";
          fields.push_back(
              {std::string(criterion) + "_" + side, hint, hint});
        }
      }
      return fields;
    }
  }
  return {};
}

std::string_view OutputTypeInstructions(OutputType type) {
  switch (type) {
    case OutputType::kLikert:
      return kLikertChoices;
    case OutputType::kBestModelIdentifier:
      return "The \"best_model\" value must be the single letter of the "
             "assistant you prefer, A or B.\n";
    case OutputType::kPair:
      return "Each score must be a number between 0 and 10, higher meaning a "
             "better answer.\n";
    case OutputType::kPreference:
      return "The \"preference\" value must be a number between 0 and 1, use "
             "values close to 0.5 when both answers have similar quality.\n";
    case OutputType::kMulti:
      return "Rate each assistant on conciseness, clarity, adherence to the "
             "instruction, comprehensiveness and style, each with a number "
             "between 0 and 10.\n";
  }
  return {};
}

Verdict ExampleVerdict(const PromptConfig& prompt) {
  Verdict v;
  v.kind = prompt.output_type;
  switch (prompt.output_type) {
    case OutputType::kLikert:
      v.payload = LikertLabel::kBBetter;
      break;
    case OutputType::kBestModelIdentifier:
      v.payload = BestLetter::kB;
      break;
    case OutputType::kPair:
      v.payload = PairScores{2, 8};
      break;
    case OutputType::kPreference:
      v.payload = PreferenceValue{0.8};
      break;
    case OutputType::kMulti:
      v.payload = MultiScores{{2, 6, 3, 7, 5}, {9, 8, 9, 6, 7}};
      break;
  }
  if (prompt.provide_answer) v.answer = std::string(kExampleAnswer);
  if (prompt.provide_explanation) {
    v.explanation = std::string(kExampleExplanation);
  }
  return v;
}

void AppendInput(std::string& out, std::string_view instruction,
                 std::string_view output_a, std::string_view output_b) {
  out += "<|User Prompt|>\n";
  out += instruction;
  out += "\n\n<|The Start of Assistant A's Answer|>\n";
  out += output_a;
  out += "\n<|The End of Assistant A's Answer|>\n\n";
  out += "<|The Start of Assistant B's Answer|>\n";
  out += output_b;
  out += "\n<|The End of Assistant B's Answer|>\n";
}

void AppendFormatDescription(std::string& out, const PromptConfig& prompt) {
  std::vector<FieldSpec> fields;
  if (prompt.provide_answer) {
    fields.push_back({"answer", "<your answer to the user prompt>",
                      "<your answer to the user prompt>"});
  }
  if (prompt.provide_explanation) {
    const std::string hint =
        "<your explanation on why you think A or B is better>";
    fields.push_back({"explanation", hint, hint});
  }
  for (auto& f : VerdictFields(prompt.output_type)) fields.push_back(f);

  out += "# Your output\n\n## Format description\n";
  if (prompt.use_json) {
    out += "Your output should follow this format (must be a valid JSON):\n";
    out += "```\n{\n";
    for (size_t i = 0; i < fields.size(); ++i) {
      out += "  \"" + fields[i].name + "\": " + fields[i].json_hint;
      out += i + 1 < fields.size() ? ",\n" : "\n";
    }
    out += "}\n```\n";
  } else {
    out += "Your output should follow this format:\n```\n";
    for (const auto& f : fields) out += f.name + ": " + f.raw_hint + "\n";
    out += "```\n";
  }
  out += OutputTypeInstructions(prompt.output_type);
  if (prompt.use_json) {
    out += "Your output must be a valid JSON object containing the fields "
           "above.\n";
  } else {
    out += "Write each field name first, followed by a colon and its value, "
           "one field per line.\n";
  }
}

double ReadDouble(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError("search space: " + what + " must be a number");
  }
}

}  // namespace

std::string_view OutputTypeName(OutputType type) {
  switch (type) {
    case OutputType::kLikert:
      return "likert";
    case OutputType::kBestModelIdentifier:
      return "best-model-identifier";
    case OutputType::kPair:
      return "pair";
    case OutputType::kPreference:
      return "preference";
    case OutputType::kMulti:
      return "multi";
  }
  return "unknown";
}

OutputType ParseOutputType(std::string_view name) {
  for (OutputType t : kAllOutputTypes) {
    if (OutputTypeName(t) == name) return t;
  }
  throw ConfigError("unknown output type: " + std::string(name));
}

std::vector<PromptConfig> AllPromptConfigs() {
  std::vector<PromptConfig> out;
  out.reserve(kNumPromptConfigs);
  for (OutputType type : kAllOutputTypes) {
    for (bool answer : {false, true}) {
      for (bool explanation : {false, true}) {
        for (bool example : {false, true}) {
          for (bool use_json : {false, true}) {
            out.push_back({type, answer, explanation, example, use_json});
          }
        }
      }
    }
  }
  return out;
}

size_t PromptIndex(const PromptConfig& p) {
  return static_cast<size_t>(p.output_type) * 16 +
         (p.provide_answer ? 8 : 0) + (p.provide_explanation ? 4 : 0) +
         (p.provide_example ? 2 : 0) + (p.use_json ? 1 : 0);
}

std::string CanonicalJson(const JudgeConfig& c) {
  std::string out = "{\"model\":";
  out += json(c.model_id).dump();
  out += ",\"temperature\":";
  out += json(c.temperature).dump();
  out += ",\"average_orders\":";
  out += c.average_orders ? "true" : "false";
  out += ",\"output_type\":\"";
  out += OutputTypeName(c.prompt.output_type);
  out += "\",\"provide_answer\":";
  out += c.prompt.provide_answer ? "true" : "false";
  out += ",\"provide_explanation\":";
  out += c.prompt.provide_explanation ? "true" : "false";
  out += ",\"provide_example\":";
  out += c.prompt.provide_example ? "true" : "false";
  out += ",\"use_json\":";
  out += c.prompt.use_json ? "true" : "false";
  out += "}";
  return out;
}

JudgeConfig ParseJudgeConfig(std::string_view text) {
  const json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) throw ConfigError("judge config: not a JSON object");
  try {
    JudgeConfig c;
    c.model_id = j.at("model").get<std::string>();
    c.temperature = j.at("temperature").get<double>();
    c.average_orders = j.at("average_orders").get<bool>();
    c.prompt.output_type =
        ParseOutputType(j.at("output_type").get<std::string>());
    c.prompt.provide_answer = j.at("provide_answer").get<bool>();
    c.prompt.provide_explanation = j.at("provide_explanation").get<bool>();
    c.prompt.provide_example = j.at("provide_example").get<bool>();
    c.prompt.use_json = j.at("use_json").get<bool>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("judge config: ") + e.what());
  }
}

std::string ConfigHash(const JudgeConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a(CanonicalJson(config))));
  return buf;
}

size_t SearchSpace::Size() const {
  return models.size() * temperatures.size() * order_modes.size() *
         kNumPromptConfigs;
}

const ModelInfo* SearchSpace::FindModel(std::string_view id) const {
  for (const auto& m : models) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

SearchSpace DefaultSearchSpace() {
  SearchSpace space;
  space.models = {
      {"llama-3.1-8b", "llama-3.1-8b", 8},
      {"llama-3.1-70b", "llama-3.1-70b", 70},
      {"qwen2.5-7b", "qwen2.5-7b", 7},
      {"qwen2.5-32b", "qwen2.5-32b", 32},
      {"qwen2.5-72b", "qwen2.5-72b", 72},
      {"gemma-2-9b", "gemma-2-9b", 9},
      {"gemma-2-27b", "gemma-2-27b", 27},
  };
  space.temperatures = {0.0, 0.01, 0.1, 1.0};
  space.order_modes = {false, true};
  return space;
}

SearchSpace LoadSearchSpace(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read search space " + path.string() + ": " +
                      e.what());
  }
  SearchSpace space;
  const YAML::Node models = root["models"];
  if (!models || !models.IsSequence()) {
    throw ConfigError("search space: 'models' must be a list");
  }
  for (const auto& m : models) {
    ModelInfo info;
    if (m.IsScalar()) {
      info.id = m.as<std::string>();
    } else if (m.IsMap() && m["id"]) {
      info.id = m["id"].as<std::string>();
      if (m["served_name"]) info.served_name = m["served_name"].as<std::string>();
      if (m["params_b"]) info.params_b = ReadDouble(m["params_b"], "params_b");
    } else {
      throw ConfigError("search space: model entries need an 'id'");
    }
    if (info.served_name.empty()) info.served_name = info.id;
    space.models.push_back(std::move(info));
  }
  const YAML::Node temps = root["temperatures"];
  if (!temps || !temps.IsSequence()) {
    throw ConfigError("search space: 'temperatures' must be a list");
  }
  for (const auto& t : temps) {
    space.temperatures.push_back(ReadDouble(t, "temperature"));
  }
  const YAML::Node orders = root["average_orders"];
  if (orders) {
    if (!orders.IsSequence()) {
      throw ConfigError("search space: 'average_orders' must be a list");
    }
    for (const auto& o : orders) {
      try {
        space.order_modes.push_back(o.as<bool>());
      } catch (const YAML::Exception&) {
        throw ConfigError("search space: average_orders entries are booleans");
      }
    }
  } else {
    space.order_modes = {false, true};
  }
  return space;
}

std::vector<JudgeConfig> EnumerateConfigs(const SearchSpace& space) {
  if (space.models.empty()) throw ConfigError("search space has no models");
  if (space.temperatures.empty()) {
    throw ConfigError("search space has no temperatures");
  }
  if (space.order_modes.empty()) {
    throw ConfigError("search space has no order modes");
  }
  for (double t : space.temperatures) {
    if (!(t >= 0.0)) throw ConfigError("temperatures must be >= 0");
  }
  const std::vector<PromptConfig> prompts = AllPromptConfigs();
  std::vector<JudgeConfig> out;
  out.reserve(space.Size());
  for (const auto& model : space.models) {
    for (double t : space.temperatures) {
      for (bool avg : space.order_modes) {
        for (const auto& p : prompts) out.push_back({model.id, t, avg, p});
      }
    }
  }
  return out;
}

std::string RenderPrompt(const PromptConfig& prompt,
                         std::string_view instruction,
                         std::string_view output_a,
                         std::string_view output_b) {
  if (instruction.empty() || output_a.empty() || output_b.empty()) {
    throw std::invalid_argument(
        "RenderPrompt: instruction and outputs must be nonempty");
  }
  const std::string_view json_suffix =
      prompt.use_json ? " (must be a valid JSON)" : "";
  std::string out(kPreamble);
  out += "\n";
  if (prompt.provide_example) {
    out += "# Example\nLet us first look at one example.\n\n## Input\n\n";
    AppendInput(out, kExampleInstruction, kExampleOutputA, kExampleOutputB);
    out += "## Your expected output";
    out += json_suffix;
    out += "\n\n```\n";
    out += RenderCompletion(ExampleVerdict(prompt), prompt.use_json);
    out += "\n```\n\n";
    if (prompt.provide_explanation) {
      out += "For the explanation, do not exceed three sentences.\n\n";
    }
    out += "# Now is the judgement I would like you to make, please follow "
           "the format I just described.\n\n## Input\n\n";
  }
  AppendInput(out, instruction, output_a, output_b);
  out += "\n";
  AppendFormatDescription(out, prompt);
  out += "\n## Your output, do not repeat the input above";
  out += json_suffix;
  out += "\n";
  return out;
}

}  // namespace judgetune
