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

#include "judgetune/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "judgetune/errors.h"
#include "judgetune/rng.h"

namespace judgetune {
namespace {

// Population moments (ddof = 0).
std::pair<double, double> MeanStd(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / v.size())};
}

}  // namespace

BootstrapResult BootstrapIndices(
    size_t n, const std::function<double(std::span<const size_t>)>& statistic,
    int n_resamples, uint64_t seed) {
  if (n == 0) throw UndefinedMetricError("bootstrap of an empty sample");
  if (n_resamples < 1) throw UndefinedMetricError("n_resamples must be >= 1");
  Rng rng(seed);
  std::vector<size_t> draw(n);
  std::vector<double> stats;
  stats.reserve(n_resamples);
  BootstrapResult result;
  for (int r = 0; r < n_resamples; ++r) {
    for (auto& i : draw) i = rng.UniformIndex(n);
    try {
      stats.push_back(statistic(draw));
    } catch (const UndefinedMetricError&) {
      ++result.n_skipped;
    }
  }
  if (stats.empty()) {
    throw UndefinedMetricError("statistic undefined on every resample");
  }
  std::tie(result.mean, result.std) = MeanStd(stats);
  return result;
}

BootstrapResult BootstrapMean(std::span<const double> values, int n_resamples,
                              uint64_t seed) {
  return BootstrapIndices(
      values.size(),
      [&](std::span<const size_t> idx) {
        double s = 0.0;
        for (size_t i : idx) s += values[i];
        return s / idx.size();
      },
      n_resamples, seed);
}

MetricReport HumanAgreement(std::span<const Annotation> annotations,
                            std::span<const Battle> battles, int n_resamples,
                            uint64_t seed) {
  std::unordered_map<std::string_view, const Battle*> by_id;
  for (const auto& b : battles) by_id.emplace(b.battle_id, &b);
  MetricReport report;
  report.metric = "human_agreement";
  report.n_samples = annotations.size();
  report.seed = seed;
  std::vector<double> hits;
  for (const auto& a : annotations) {
    auto it = by_id.find(a.battle_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("annotation for unknown battle " + a.battle_id);
    }
    if (!it->second->human_label) {
      throw std::invalid_argument("battle without human label: " + a.battle_id);
    }
    if (a.status != AnnotationStatus::kOk || !a.discrete) {
      ++report.n_excluded;
      continue;
    }
    hits.push_back(*a.discrete == *it->second->human_label ? 1.0 : 0.0);
  }
  if (hits.empty()) throw UndefinedMetricError("no usable annotations");
  report.point = std::accumulate(hits.begin(), hits.end(), 0.0) / hits.size();
  if (n_resamples > 0) {
    const BootstrapResult b = BootstrapMean(hits, n_resamples, seed);
    report.bootstrap_mean = b.mean;
    report.bootstrap_std = b.std;
    report.n_resamples = n_resamples;
  }
  return report;
}

double AgreementRate(std::span<const double> verdicts,
                     std::span<const double> labels) {
  if (verdicts.size() != labels.size()) {
    throw std::invalid_argument("verdict and label counts differ");
  }
  if (verdicts.empty()) throw UndefinedMetricError("no verdicts");
  size_t hits = 0;
  for (size_t i = 0; i < verdicts.size(); ++i) hits += verdicts[i] == labels[i];
  return static_cast<double>(hits) / verdicts.size();
}

std::map<std::string, double> ModelScores(
    std::span<const Annotation> annotations, std::span<const Battle> battles,
    std::string_view baseline_model) {
  std::unordered_map<std::string_view, const Battle*> by_id;
  for (const auto& b : battles) by_id.emplace(b.battle_id, &b);
  std::map<std::string, std::pair<double, size_t>> sums;
  std::set<std::string> seen;
  for (const auto& a : annotations) {
    auto it = by_id.find(a.battle_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("annotation for unknown battle " + a.battle_id);
    }
    const Battle& b = *it->second;
    if (!b.model_a || !b.model_b || *b.model_a == *b.model_b) continue;
    std::string model;
    bool model_is_b;
    if (*b.model_a == baseline_model) {
      model = *b.model_b;
      model_is_b = true;
    } else if (*b.model_b == baseline_model) {
      model = *b.model_a;
      model_is_b = false;
    } else {
      continue;
    }
    seen.insert(model);
    if (a.status != AnnotationStatus::kOk || !a.preference) continue;
    auto& [sum, count] = sums[model];
    sum += model_is_b ? *a.preference : 1.0 - *a.preference;
    ++count;
  }
  std::map<std::string, double> scores;
  for (const auto& model : seen) {
    auto it = sums.find(model);
    if (it == sums.end()) {
      throw UndefinedMetricError("no usable annotations for model " + model);
    }
    scores[model] = it->second.first / it->second.second;
  }
  return scores;
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (i + j) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  if (a.size() < 2) throw std::invalid_argument("need at least 2 entries");
  const std::vector<double> ra = AverageRanks(a);
  const std::vector<double> rb = AverageRanks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) {
    throw UndefinedMetricError("spearman of a constant vector");
  }
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

MetricReport SpearmanVsGolden(const std::map<std::string, double>& judge,
                              const std::map<std::string, double>& golden,
                              int n_resamples, uint64_t seed) {
  std::vector<double> js, gs;
  for (const auto& [model, score] : judge) {
    auto it = golden.find(model);
    if (it == golden.end()) continue;
    js.push_back(score);
    gs.push_back(it->second);
  }
  MetricReport report;
  report.metric = "spearman";
  report.n_samples = js.size();
  report.seed = seed;
  if (js.size() < 2) {
    throw UndefinedMetricError("fewer than 2 models with golden scores");
  }
  report.point = Spearman(js, gs);
  if (n_resamples > 0) {
    const BootstrapResult b = BootstrapIndices(
        js.size(),
        [&](std::span<const size_t> idx) {
          std::vector<double> x, y;
          for (size_t i : idx) {
            x.push_back(js[i]);
            y.push_back(gs[i]);
          }
          return Spearman(x, y);
        },
        n_resamples, seed);
    report.bootstrap_mean = b.mean;
    report.bootstrap_std = b.std;
    report.n_resamples = n_resamples;
  }
  return report;
}

double CoefficientOfVariation(double mean, double std) {
  if (mean == 0.0) throw UndefinedMetricError("coefficient of variation at mean 0");
  return std / mean * 100.0;
}

FlipRateResult FlipRate(AnnotationEngine& engine, const JudgeConfig& config,
                        std::span<const Battle> battles) {
  const double band = engine.options().tie_band;
  FlipRateResult result;
  size_t flips = 0;
  for (const auto& battle : battles) {
    OrderOutcome ab, ba;
    try {
      ab = engine.QueryOrder(config, battle, PresentedOrder::kAB);
      ba = engine.QueryOrder(config, battle, PresentedOrder::kBA);
    } catch (const TransportError&) {
      ++result.n_excluded;
      continue;
    }
    if (!ab.preference || !ba.preference) {
      ++result.n_excluded;
      continue;
    }
    const double v_ab = Discretize(PreferenceScore(*ab.preference), band);
    const double v_ba = 1.0 - Discretize(PreferenceScore(*ba.preference), band);
    flips += v_ab != v_ba;
    ++result.n_used;
  }
  if (result.n_used == 0) throw UndefinedMetricError("no usable battles");
  result.rate = static_cast<double>(flips) / result.n_used;
  return result;
}

}  // namespace judgetune
