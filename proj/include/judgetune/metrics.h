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

#ifndef JUDGETUNE_METRICS_H_
#define JUDGETUNE_METRICS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "judgetune/annotation.h"
#include "judgetune/battle.h"

namespace judgetune {

struct MetricReport {
  std::string metric;
  double point = 0.0;
  // Bootstrap fields stay zero when n_resamples == 0.
  double bootstrap_mean = 0.0;
  double bootstrap_std = 0.0;
  int n_resamples = 0;
  size_t n_samples = 0;
  size_t n_excluded = 0;
  uint64_t seed = 0;
};

struct BootstrapResult {
  double mean = 0.0;
  double std = 0.0;
  // Resamples on which the statistic was undefined.
  int n_skipped = 0;
};

// Resamples n indices with replacement `n_resamples` times and evaluates the
// statistic on each draw. Draws on which the statistic throws
// UndefinedMetricError are skipped. Throws UndefinedMetricError if n == 0,
// n_resamples < 1, or every draw is undefined.
BootstrapResult BootstrapIndices(
    size_t n, const std::function<double(std::span<const size_t>)>& statistic,
    int n_resamples, uint64_t seed);

// Bootstrap of the mean of `values`.
BootstrapResult BootstrapMean(std::span<const double> values, int n_resamples,
                              uint64_t seed);

// Fraction of ok annotations whose discrete verdict equals the battle's human
// label (exact equality on {0, 0.5, 1}). Battles are matched by id. The
// bootstrap resamples battles. Throws std::invalid_argument if an annotated
// battle has no label or is unknown, UndefinedMetricError if no annotation is
// usable.
MetricReport HumanAgreement(std::span<const Annotation> annotations,
                            std::span<const Battle> battles,
                            int n_resamples = 0, uint64_t seed = 0);

// Agreement of raw {0, 0.5, 1} verdicts with labels, index-aligned.
double AgreementRate(std::span<const double> verdicts,
                     std::span<const double> labels);

// Mean preference of each model against the baseline: battles with the
// baseline on one side and model i on the other, oriented so that 1 means
// model i preferred. Throws UndefinedMetricError for a model without usable
// annotations.
std::map<std::string, double> ModelScores(
    std::span<const Annotation> annotations, std::span<const Battle> battles,
    std::string_view baseline_model);

// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> AverageRanks(std::span<const double> values);

// Pearson correlation of average-rank vectors. Throws std::invalid_argument
// on length mismatch or fewer than 2 entries, UndefinedMetricError when a
// vector is constant.
double Spearman(std::span<const double> a, std::span<const double> b);

// Spearman between judge scores and golden scores over their common models,
// bootstrapping the set of models.
MetricReport SpearmanVsGolden(const std::map<std::string, double>& judge,
                              const std::map<std::string, double>& golden,
                              int n_resamples = 0, uint64_t seed = 0);

// std / mean x 100. Throws UndefinedMetricError when mean == 0.
double CoefficientOfVariation(double mean, double std);

struct FlipRateResult {
  double rate = 0.0;
  size_t n_used = 0;
  size_t n_excluded = 0;
};

// Fraction of battles whose discrete verdict under order AB differs from the
// relabelled (1 - v) verdict under order BA. Parse and transport failures are
// excluded. Throws UndefinedMetricError if no battle is usable.
FlipRateResult FlipRate(AnnotationEngine& engine, const JudgeConfig& config,
                        std::span<const Battle> battles);

}  // namespace judgetune

#endif  // JUDGETUNE_METRICS_H_
