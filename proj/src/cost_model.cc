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

#include "judgetune/cost_model.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "judgetune/errors.h"

namespace judgetune {

void TokenPriceTable::Set(std::string model_id, double price_per_1k,
                          std::string note) {
  if (!(price_per_1k > 0.0) || !std::isfinite(price_per_1k)) {
    throw ConfigError("price for " + model_id + " must be > 0");
  }
  entries_[std::move(model_id)] = TokenPrice{price_per_1k, std::move(note)};
}

double TokenPriceTable::PricePer1k(std::string_view model_id) const {
  auto it = entries_.find(model_id);
  if (it == entries_.end()) {
    throw ConfigError("no token price for model " + std::string(model_id));
  }
  return it->second.price_per_1k;
}

bool TokenPriceTable::Contains(std::string_view model_id) const {
  return entries_.find(model_id) != entries_.end();
}

TokenPriceTable DefaultPriceTable() {
  // H100 at 2.79/h for models above 48GB of VRAM, L40 at 0.99/h otherwise.
  TokenPriceTable t;
  t.Set("qwen2.5-72b", 0.58, "runtime estimate, H100");
  t.Set("qwen2.5-32b", 0.36, "runtime estimate, L40");
  t.Set("llama-3.1-70b", 0.35, "runtime estimate, H100");
  t.Set("gemma-2-27b", 0.30, "runtime estimate, H100");
  t.Set("gemma-2-9b", 0.14, "runtime estimate, L40");
  t.Set("qwen2.5-7b", 0.12, "runtime estimate, L40");
  t.Set("llama-3.1-8b", 0.11, "runtime estimate, L40");
  return t;
}

TokenPriceTable LoadPriceTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open price table " + path.string());
  TokenPriceTable table;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const size_t hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) {
      const size_t b = col.find_first_not_of(" \t\r");
      const size_t e = col.find_last_not_of(" \t\r");
      cols.push_back(b == std::string::npos ? "" : col.substr(b, e - b + 1));
    }
    if (cols[0] == "model_id") continue;
    if (cols.size() < 2) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected model_id,price_per_1k");
    }
    double price = 0;
    try {
      size_t used = 0;
      price = std::stod(cols[1], &used);
      if (used != cols[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": bad price '" + cols[1] + "'");
    }
    table.Set(cols[0], price, cols.size() > 2 ? cols[2] : "");
  }
  return table;
}

double AnnotationCost(int64_t prompt_tokens, int64_t completion_tokens,
                      std::string_view model_id,
                      const TokenPriceTable& table) {
  if (prompt_tokens < 0 || completion_tokens < 0) {
    throw std::invalid_argument("token counts must be >= 0");
  }
  return static_cast<double>(prompt_tokens + completion_tokens) / 1000.0 *
         table.PricePer1k(model_id);
}

double CampaignCostEstimate(uint64_t total_annotations,
                            double seconds_per_annotation,
                            double hourly_rate) {
  if (seconds_per_annotation < 0 || hourly_rate < 0) {
    throw std::invalid_argument("campaign estimate inputs must be >= 0");
  }
  return static_cast<double>(total_annotations) * seconds_per_annotation /
         3600.0 * hourly_rate;
}

double GridBaselineCost(uint64_t n_judges, uint64_t n_models,
                        double cost_per_model_eval) {
  if (cost_per_model_eval < 0) {
    throw std::invalid_argument("cost per model evaluation must be >= 0");
  }
  return static_cast<double>(n_judges) * static_cast<double>(n_models) *
         cost_per_model_eval;
}

}  // namespace judgetune
