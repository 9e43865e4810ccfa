// Copyright 2026 The Softgames Authors.
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

#ifndef SOFTGAMES_ENVS_STEP_HPP_
#define SOFTGAMES_ENVS_STEP_HPP_

#include <string_view>

namespace softgames::envs {

enum class StepEvent { kNone, kBlocked, kScoredPl, kScoredOp, kPickedUp, kTimeout };

inline std::string_view to_string(StepEvent e) {
  switch (e) {
    case StepEvent::kNone: return "none";
    case StepEvent::kBlocked: return "blocked";
    case StepEvent::kScoredPl: return "scored_pl";
    case StepEvent::kScoredOp: return "scored_op";
    case StepEvent::kPickedUp: return "picked_up";
    case StepEvent::kTimeout: return "timeout";
  }
  return "none";
}

template <typename State>
struct StepOutcome {
  State next_state;
  double reward_pl = 0.0;
  bool terminal = false;
  StepEvent info = StepEvent::kNone;

  // Terminal by a genuine game event rather than the episode cap.
  bool absorbing() const { return terminal && info != StepEvent::kTimeout; }
};

}  // namespace softgames::envs

#endif  // SOFTGAMES_ENVS_STEP_HPP_
