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

#ifndef JUDGETUNE_BATTLE_H_
#define JUDGETUNE_BATTLE_H_

#include <optional>
#include <string>

namespace judgetune {

// One instruction, two candidate outputs and an optional human preference
// (0: output_a preferred, 0.5: tie, 1: output_b preferred).
struct Battle {
  std::string battle_id;
  std::string instruction;
  std::string output_a;
  std::string output_b;
  std::optional<double> human_label;
  std::optional<std::string> model_a;
  std::optional<std::string> model_b;

  friend bool operator==(const Battle&, const Battle&) = default;
};

// Same battle with the two outputs (and model ids, and label) exchanged.
Battle Swapped(const Battle& battle);

// True for 0, 0.5 and 1.
bool IsValidLabel(double label);

}  // namespace judgetune

#endif  // JUDGETUNE_BATTLE_H_
