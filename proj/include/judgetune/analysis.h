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

#ifndef JUDGETUNE_ANALYSIS_H_
#define JUDGETUNE_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "judgetune/annotation.h"
#include "judgetune/battle.h"
#include "judgetune/search_space.h"
#include "judgetune/tuning.h"

namespace judgetune {

// Hyperparameter -> value label -> fraction of the stratum's top-k configs.
using FrequencyTable = std::map<std::string, std::map<std::string, double>>;

struct SurvivalStratum {
  std::string name;  // "small" or "large"
  size_t n_configs = 0;
  // Absent when the stratum has no configs.
  std::optional<FrequencyTable> frequencies;
};

struct SurvivalReport {
  size_t k = 0;
  double size_threshold_b = 10.0;
  SurvivalStratum small;
  SurvivalStratum large;
};

// Frequencies of every hyperparameter value among the first k configs of
// each size stratum (params_b < threshold: small). Values come from `space`
// so that absent values report 0. Throws std::invalid_argument if k exceeds
// the ranking length.
SurvivalReport SurvivalAnalysis(std::span<const JudgeConfig> ranked,
                                size_t k, const SearchSpace& space,
                                double size_threshold_b = 10.0);

struct StabilityMatrix {
  size_t size = 0;
  // Row-major size x size; entries with defined == false are undefined.
  std::vector<double> values;
  std::vector<bool> defined;

  double at(size_t i, size_t j) const { return values[i * size + j]; }
  bool is_defined(size_t i, size_t j) const { return defined[i * size + j]; }
};

// Correlation between the rows of `scores` (m rows, n columns): rows are
// centered and scaled, then X X^T / n. Symmetric with an exact unit diagonal.
// Entries involving a constant row are left undefined. Throws
// std::invalid_argument when n < 2 or rows differ in length.
StabilityMatrix PromptStabilityMatrix(
    const std::vector<std::vector<double>>& scores);

struct ScalingCell {
  double model_size = 0.0;
  size_t n_instructions = 0;
  bool missing = false;
  double value = 0.0;
  double dispersion = 0.0;
};

using AnnotationMetric = std::function<double(std::span<const Annotation>)>;

// For every (model size, instruction count) cell, evaluates `metric` on
// `n_subsets` seeded random subsets of n annotations drawn without
// replacement from that size's pool; value and dispersion are their mean
// and std. Cells without enough annotations, or whose metric is undefined,
// are flagged missing.
std::vector<ScalingCell> ScalingCurves(
    const std::map<double, std::vector<Annotation>>& pools,
    std::span<const size_t> instruction_counts, const AnnotationMetric& metric,
    int n_subsets, uint64_t seed);

struct ReportInputs {
  const SearchSpace* space = nullptr;
  size_t survival_k = 100;
  double size_threshold_b = 10.0;
};

// Writes into out_dir:
//   rung_<r>_objectives.csv, rung_<r>_scatter.svg  per completed rung
//   pareto_front.csv        last completed rung's front
//   survival.csv            rung 0 ranking, top-k per size stratum
//   stability_matrix.csv    per-model correlation over prompts (rung 0),
//                           when at least two models share two prompts
// Output bytes depend only on the inputs. The directory is checked for
// writability before anything is written. Returns the written file names.
std::vector<std::string> EmitReport(const TuningState& state,
                                    const ReportInputs& inputs,
                                    const std::filesystem::path& out_dir);

}  // namespace judgetune

#endif  // JUDGETUNE_ANALYSIS_H_
