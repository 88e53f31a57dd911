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

#ifndef JUDGETUNE_MOO_H_
#define JUDGETUNE_MOO_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace judgetune {

enum class Direction { kMinimize, kMaximize };

// Objective directions shared by every point of a run. Objective 0 is the
// primary objective.
struct ObjectiveSchema {
  std::vector<Direction> directions;
};

// (agreement: maximize, cost per annotation: minimize).
ObjectiveSchema AgreementCostSchema();

struct ObjectivePoint {
  std::string config_hash;
  std::vector<double> objectives;
  size_t fidelity = 0;
};

// a <= b in every (minimization-oriented) component and < in at least one.
// Throws std::invalid_argument if either point does not match the schema.
bool Dominates(const ObjectivePoint& a, const ObjectivePoint& b,
               const ObjectiveSchema& schema);

// Layers of indices into `points`: layer 0 is the Pareto front, layer k the
// front of what remains after removing layers < k. Indices within a layer are
// ascending.
std::vector<std::vector<size_t>> NonDominatedSort(
    std::span<const ObjectivePoint> points, const ObjectiveSchema& schema);

// Greedy farthest-point ordering of `layer` (indices into `points`) in
// min-max normalized, minimization-oriented objective space. Starts from the
// best point on objective 0; ties resolve to the earlier index.
std::vector<size_t> EpsilonNetOrder(std::span<const ObjectivePoint> points,
                                    std::span<const size_t> layer,
                                    const ObjectiveSchema& schema);

// Layers in order, each in epsilon-net order. A permutation of indices.
std::vector<size_t> RankConfigs(std::span<const ObjectivePoint> points,
                                const ObjectiveSchema& schema);

}  // namespace judgetune

#endif  // JUDGETUNE_MOO_H_
