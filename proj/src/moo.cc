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

#include "judgetune/moo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace judgetune {
namespace {

void CheckSchema(const ObjectivePoint& p, const ObjectiveSchema& schema) {
  if (p.objectives.size() != schema.directions.size()) {
    throw std::invalid_argument("objective vector of " + p.config_hash +
                                " does not match the schema");
  }
}

double Oriented(double v, Direction d) {
  return d == Direction::kMaximize ? -v : v;
}

}  // namespace

ObjectiveSchema AgreementCostSchema() {
  return {{Direction::kMaximize, Direction::kMinimize}};
}

bool Dominates(const ObjectivePoint& a, const ObjectivePoint& b,
               const ObjectiveSchema& schema) {
  CheckSchema(a, schema);
  CheckSchema(b, schema);
  bool strict = false;
  for (size_t k = 0; k < schema.directions.size(); ++k) {
    const double x = Oriented(a.objectives[k], schema.directions[k]);
    const double y = Oriented(b.objectives[k], schema.directions[k]);
    if (x > y) return false;
    if (x < y) strict = true;
  }
  return strict;
}

// Deb et al.'s fast non-dominated sort.
std::vector<std::vector<size_t>> NonDominatedSort(
    std::span<const ObjectivePoint> points, const ObjectiveSchema& schema) {
  const size_t n = points.size();
  for (const auto& p : points) CheckSchema(p, schema);
  std::vector<std::vector<size_t>> dominated(n);
  std::vector<size_t> count(n, 0);
  std::vector<std::vector<size_t>> layers;
  std::vector<size_t> front;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (Dominates(points[i], points[j], schema)) {
        dominated[i].push_back(j);
        ++count[j];
      } else if (Dominates(points[j], points[i], schema)) {
        dominated[j].push_back(i);
        ++count[i];
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (count[i] == 0) front.push_back(i);
  }
  while (!front.empty()) {
    std::vector<size_t> next;
    for (size_t i : front) {
      for (size_t j : dominated[i]) {
        if (--count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    layers.push_back(std::move(front));
    front = std::move(next);
  }
  return layers;
}

std::vector<size_t> EpsilonNetOrder(std::span<const ObjectivePoint> points,
                                    std::span<const size_t> layer,
                                    const ObjectiveSchema& schema) {
  const size_t m = schema.directions.size();
  const size_t k = layer.size();
  if (k == 0) return {};
  std::vector<std::vector<double>> x(k, std::vector<double>(m));
  for (size_t d = 0; d < m; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (size_t i = 0; i < k; ++i) {
      CheckSchema(points[layer[i]], schema);
      x[i][d] = Oriented(points[layer[i]].objectives[d], schema.directions[d]);
      lo = std::min(lo, x[i][d]);
      hi = std::max(hi, x[i][d]);
    }
    const double range = hi - lo;
    for (size_t i = 0; i < k; ++i) {
      x[i][d] = range > 0.0 ? (x[i][d] - lo) / range : 0.0;
    }
  }
  // Tie-breaks follow the layer's position order.
  std::vector<size_t> pos(k);
  for (size_t i = 0; i < k; ++i) pos[i] = i;
  std::stable_sort(pos.begin(), pos.end(),
                   [&](size_t a, size_t b) { return layer[a] < layer[b]; });

  std::vector<bool> chosen(k, false);
  std::vector<double> min_dist(k, std::numeric_limits<double>::infinity());
  std::vector<size_t> order;
  order.reserve(k);
  size_t current = pos[0];
  for (size_t p : pos) {
    if (x[p][0] < x[current][0]) current = p;
  }
  for (;;) {
    chosen[current] = true;
    order.push_back(layer[current]);
    if (order.size() == k) break;
    size_t best = k;
    for (size_t p : pos) {
      if (chosen[p]) continue;
      double d2 = 0.0;
      for (size_t d = 0; d < m; ++d) {
        const double diff = x[p][d] - x[current][d];
        d2 += diff * diff;
      }
      min_dist[p] = std::min(min_dist[p], std::sqrt(d2));
      if (best == k || min_dist[p] > min_dist[best]) best = p;
    }
    current = best;
  }
  return order;
}

std::vector<size_t> RankConfigs(std::span<const ObjectivePoint> points,
                                const ObjectiveSchema& schema) {
  std::vector<size_t> ranked;
  ranked.reserve(points.size());
  for (const auto& layer : NonDominatedSort(points, schema)) {
    for (size_t i : EpsilonNetOrder(points, layer, schema)) ranked.push_back(i);
  }
  return ranked;
}

}  // namespace judgetune
