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

#ifndef SOFTGAMES_ENVS_GRIDWORLD_HPP_
#define SOFTGAMES_ENVS_GRIDWORLD_HPP_

#include <array>
#include <cstddef>
#include <stdexcept>

#include "softgames/core/types.hpp"
#include "softgames/envs/step.hpp"

namespace softgames::envs {

// Simultaneous-move 5x6 grid. Rows and columns are 1-based, row 1 on top.
// The player earns +1 for picking up the object at (2, 6) and pays 0.02 for
// every other action; agents block each other.
struct GridWorldConfig {
  static constexpr int kRows = 5;
  static constexpr int kCols = 6;
  static constexpr std::size_t kNumActions = 5;

  int object_row = 2;
  int object_col = 6;
  int start_pl_row = 5, start_pl_col = 1;
  int start_op_row = 5, start_op_col = 6;
  double move_cost = -0.02;
  double pickup_reward = 1.0;
  int max_steps = 200;
  double gamma = 0.9;
};

enum class GridAction : std::size_t { kLeft = 0, kRight, kUp, kDown, kPickUp };

struct Cell {
  int row = 1;
  int col = 1;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridWorldState {
  Cell pos_pl;
  Cell pos_op;
  bool object_present = true;
  int step_count = 0;
  friend bool operator==(const GridWorldState&, const GridWorldState&) = default;
};

using GridStepOutcome = StepOutcome<GridWorldState>;

inline bool in_grid(Cell c) {
  return c.row >= 1 && c.row <= GridWorldConfig::kRows && c.col >= 1 &&
         c.col <= GridWorldConfig::kCols;
}

inline Cell intended_cell(Cell from, GridAction a) {
  Cell to = from;
  switch (a) {
    case GridAction::kLeft: --to.col; break;
    case GridAction::kRight: ++to.col; break;
    case GridAction::kUp: --to.row; break;
    case GridAction::kDown: ++to.row; break;
    case GridAction::kPickUp: break;
  }
  return in_grid(to) ? to : from;
}

inline GridAction to_grid_action(std::size_t a) {
  if (a >= GridWorldConfig::kNumActions) {
    throw std::out_of_range("gridworld: invalid action index");
  }
  return static_cast<GridAction>(a);
}

inline GridWorldState gridworld_reset(const GridWorldConfig& cfg = {}) {
  return {{cfg.start_pl_row, cfg.start_pl_col},
          {cfg.start_op_row, cfg.start_op_col},
          true,
          0};
}

/// Deterministic joint step. Moving into the cell the other agent targets,
/// or into the cell it currently occupies, leaves the mover in place.
inline GridStepOutcome gridworld_step(const GridWorldState& state,
                                      std::size_t a_pl, std::size_t a_op,
                                      const GridWorldConfig& cfg = {}) {
  const GridAction act_pl = to_grid_action(a_pl);
  const GridAction act_op = to_grid_action(a_op);
  if (!in_grid(state.pos_pl) || !in_grid(state.pos_op) ||
      state.pos_pl == state.pos_op) {
    throw std::invalid_argument("gridworld: invalid state");
  }

  const Cell target_pl = intended_cell(state.pos_pl, act_pl);
  const Cell target_op = intended_cell(state.pos_op, act_op);
  const bool moves_pl = !(target_pl == state.pos_pl);
  const bool moves_op = !(target_op == state.pos_op);
  const bool same_target = moves_pl && moves_op && target_pl == target_op;
  const bool blocked_pl = moves_pl && (same_target || target_pl == state.pos_op);
  const bool blocked_op = moves_op && (same_target || target_op == state.pos_pl);

  GridStepOutcome out;
  out.next_state = state;
  out.next_state.pos_pl = blocked_pl ? state.pos_pl : target_pl;
  out.next_state.pos_op = blocked_op ? state.pos_op : target_op;
  out.next_state.step_count = state.step_count + 1;
  out.info = (blocked_pl || blocked_op) ? StepEvent::kBlocked : StepEvent::kNone;

  const bool at_object = state.pos_pl == Cell{cfg.object_row, cfg.object_col};
  if (act_pl == GridAction::kPickUp && at_object && state.object_present) {
    out.next_state.object_present = false;
    out.reward_pl = cfg.pickup_reward;
    out.terminal = true;
    out.info = StepEvent::kPickedUp;
    return out;
  }
  out.reward_pl = cfg.move_cost;
  if (out.next_state.step_count >= cfg.max_steps) {
    out.terminal = true;
    out.info = StepEvent::kTimeout;
  }
  return out;
}

// Tabular indexing: one state per ordered pair of cells plus an absorbing
// "done" state reached after the pick-up.
inline constexpr std::size_t kGridCells =
    GridWorldConfig::kRows * GridWorldConfig::kCols;
inline constexpr std::size_t kGridDoneState = kGridCells * kGridCells;
inline constexpr std::size_t kGridNumStates = kGridDoneState + 1;

inline std::size_t cell_index(Cell c) {
  return static_cast<std::size_t>((c.row - 1) * GridWorldConfig::kCols +
                                  (c.col - 1));
}
inline Cell cell_from_index(std::size_t i) {
  return {static_cast<int>(i / GridWorldConfig::kCols) + 1,
          static_cast<int>(i % GridWorldConfig::kCols) + 1};
}

inline StateId gridworld_index(const GridWorldState& s) {
  if (!s.object_present) return kGridDoneState;
  return cell_index(s.pos_pl) * kGridCells + cell_index(s.pos_op);
}

/// Exact model of the grid-world without the step cap. Co-located pairs are
/// unreachable and modelled as zero-reward self loops.
inline GameModel gridworld_model(const GridWorldConfig& cfg = {}) {
  constexpr std::size_t kA = GridWorldConfig::kNumActions;
  GameModel model(kGridNumStates, kA, kA, cfg.gamma);
  for (std::size_t i = 0; i < kGridCells; ++i) {
    for (std::size_t j = 0; j < kGridCells; ++j) {
      const StateId s = i * kGridCells + j;
      GridWorldState state{cell_from_index(i), cell_from_index(j), true, 0};
      for (std::size_t a = 0; a < kA; ++a) {
        for (std::size_t b = 0; b < kA; ++b) {
          if (i == j) {
            model.set_successors(s, a, b, {{s, 1.0}});
            continue;
          }
          GridWorldConfig uncapped = cfg;
          uncapped.max_steps = 1 << 30;
          const auto out = gridworld_step(state, a, b, uncapped);
          model.set_reward(s, a, b, out.reward_pl);
          model.set_successors(s, a, b,
                               {{gridworld_index(out.next_state), 1.0}});
        }
      }
    }
  }
  for (std::size_t a = 0; a < kA; ++a) {
    for (std::size_t b = 0; b < kA; ++b) {
      model.set_successors(kGridDoneState, a, b, {{kGridDoneState, 1.0}});
    }
  }
  return model;
}

}  // namespace softgames::envs

#endif  // SOFTGAMES_ENVS_GRIDWORLD_HPP_
