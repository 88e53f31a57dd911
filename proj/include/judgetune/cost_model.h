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

#ifndef JUDGETUNE_COST_MODEL_H_
#define JUDGETUNE_COST_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace judgetune {

struct TokenPrice {
  double price_per_1k = 0.0;
  std::string note;
};

class TokenPriceTable {
 public:
  // Throws ConfigError unless price_per_1k > 0.
  void Set(std::string model_id, double price_per_1k, std::string note = "");
  // Throws ConfigError for unknown models.
  double PricePer1k(std::string_view model_id) const;
  bool Contains(std::string_view model_id) const;
  const std::map<std::string, TokenPrice, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, TokenPrice, std::less<>> entries_;
};

// Per-1K-token prices measured for the seven open-weight judge models.
TokenPriceTable DefaultPriceTable();

// Plain-text records `model_id,price_per_1k[,note]`; blank lines, `#`
// comments and a `model_id,...` header line are skipped.
TokenPriceTable LoadPriceTable(const std::filesystem::path& path);

// (prompt_tokens + completion_tokens) / 1000 x price.
double AnnotationCost(int64_t prompt_tokens, int64_t completion_tokens,
                      std::string_view model_id, const TokenPriceTable& table);

// total_annotations x seconds_per_annotation / 3600 x hourly_rate.
double CampaignCostEstimate(uint64_t total_annotations,
                            double seconds_per_annotation, double hourly_rate);

// Cost of annotating a full grid of models with every judge:
// n_judges x n_models x cost_per_model_eval.
double GridBaselineCost(uint64_t n_judges, uint64_t n_models,
                        double cost_per_model_eval);

}  // namespace judgetune

#endif  // JUDGETUNE_COST_MODEL_H_
