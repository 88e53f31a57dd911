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

#ifndef JUDGETUNE_SEARCH_SPACE_H_
#define JUDGETUNE_SEARCH_SPACE_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace judgetune {

enum class OutputType {
  kLikert,
  kBestModelIdentifier,
  kPair,
  kPreference,
  kMulti,
};

inline constexpr std::array<OutputType, 5> kAllOutputTypes = {
    OutputType::kLikert, OutputType::kBestModelIdentifier, OutputType::kPair,
    OutputType::kPreference, OutputType::kMulti};

// "likert", "best-model-identifier", "pair", "preference", "multi".
std::string_view OutputTypeName(OutputType type);
// Throws ConfigError on an unknown name.
OutputType ParseOutputType(std::string_view name);

struct PromptConfig {
  OutputType output_type = OutputType::kPair;
  bool provide_answer = false;
  bool provide_explanation = false;
  bool provide_example = false;
  bool use_json = false;

  friend bool operator==(const PromptConfig&, const PromptConfig&) = default;
};

inline constexpr size_t kNumPromptConfigs = 80;

// All 80 prompt configurations, output type slowest, then answer,
// explanation, example, json (false before true).
std::vector<PromptConfig> AllPromptConfigs();

// Position of `prompt` within AllPromptConfigs().
size_t PromptIndex(const PromptConfig& prompt);

struct JudgeConfig {
  std::string model_id;
  double temperature = 0.0;
  bool average_orders = false;
  PromptConfig prompt;

  friend bool operator==(const JudgeConfig&, const JudgeConfig&) = default;
};

// Canonical single-line JSON with a fixed key order. Equal configs serialize
// to identical bytes, so the string (and its hash) identifies the config.
std::string CanonicalJson(const JudgeConfig& config);
// Inverse of CanonicalJson; throws ConfigError on malformed input.
JudgeConfig ParseJudgeConfig(std::string_view json);
// 16 lowercase hex digits of FNV-1a-64 over CanonicalJson(config).
std::string ConfigHash(const JudgeConfig& config);

// One entry of the model registry.
struct ModelInfo {
  std::string id;
  // Name sent to the inference endpoint; defaults to `id`.
  std::string served_name;
  // Parameter count in billions, used for size strata in survival analysis.
  double params_b = 0.0;
};

struct SearchSpace {
  std::vector<ModelInfo> models;
  std::vector<double> temperatures;
  std::vector<bool> order_modes;

  // |models| x |temperatures| x |order_modes| x 80.
  size_t Size() const;
  const ModelInfo* FindModel(std::string_view id) const;
};

// Seven open-weight models, temperatures {0, 0.01, 0.1, 1}, both order modes.
SearchSpace DefaultSearchSpace();

// Reads a YAML search-space file:
//   models:
//     - {id: llama-3.1-8b, params_b: 8, served_name: meta-llama/...}
//   temperatures: [0.0, 0.01, 0.1, 1.0]
//   average_orders: [false, true]
// Throws ConfigError if the file is missing or malformed.
SearchSpace LoadSearchSpace(const std::filesystem::path& path);

// Deterministic lexicographic enumeration over (model, temperature, order
// mode, prompt) in the listed orders. Throws ConfigError on an empty model
// or temperature list, a negative temperature, or an empty order-mode list.
std::vector<JudgeConfig> EnumerateConfigs(const SearchSpace& space);

// Full judge prompt for one battle. Pure: identical inputs produce identical
// bytes. Throws std::invalid_argument if any text argument is empty.
std::string RenderPrompt(const PromptConfig& prompt,
                         std::string_view instruction,
                         std::string_view output_a,
                         std::string_view output_b);

}  // namespace judgetune

#endif  // JUDGETUNE_SEARCH_SPACE_H_
