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

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "softgames/core/soft_ops.hpp"
#include "softgames/envs/gridworld.hpp"
#include "softgames/envs/pong.hpp"
#include "softgames/envs/tabular.hpp"

namespace sg = softgames;
namespace env = softgames::envs;

namespace {

constexpr std::size_t kLeft = 0, kRight = 1, kUp = 2, kDown = 3, kPick = 4;

env::GridWorldState grid(env::Cell pl, env::Cell op) { return {pl, op, true, 0}; }

TEST(GridWorld, ResetPositions) {
  const auto s = env::gridworld_reset();
  EXPECT_EQ(s.pos_pl, (env::Cell{5, 1}));
  EXPECT_EQ(s.pos_op, (env::Cell{5, 6}));
  EXPECT_TRUE(s.object_present);
  EXPECT_EQ(s.step_count, 0);
}

TEST(GridWorld, MoveCost) {
  const auto out = env::gridworld_step(grid({2, 5}, {5, 1}), kRight, kLeft);
  EXPECT_EQ(out.next_state.pos_pl, (env::Cell{2, 6}));
  EXPECT_DOUBLE_EQ(out.reward_pl, -0.02);
  EXPECT_FALSE(out.terminal);
}

TEST(GridWorld, PickUp) {
  const auto out = env::gridworld_step(grid({2, 6}, {5, 1}), kPick, kUp);
  EXPECT_DOUBLE_EQ(out.reward_pl, 1.0);
  EXPECT_TRUE(out.terminal);
  EXPECT_EQ(out.info, env::StepEvent::kPickedUp);
  EXPECT_FALSE(out.next_state.object_present);
}

TEST(GridWorld, PickUpElsewhereIsCostlyNoOp) {
  const auto s = grid({3, 3}, {5, 1});
  const auto out = env::gridworld_step(s, kPick, kPick);
  EXPECT_EQ(out.next_state.pos_pl, s.pos_pl);
  EXPECT_DOUBLE_EQ(out.reward_pl, -0.02);
  EXPECT_FALSE(out.terminal);
}

TEST(GridWorld, SameTargetBlocksBoth) {
  // (3,2) moves right and (3,4) moves left into (3,3).
  const auto out = env::gridworld_step(grid({3, 2}, {3, 4}), kRight, kLeft);
  EXPECT_EQ(out.next_state.pos_pl, (env::Cell{3, 2}));
  EXPECT_EQ(out.next_state.pos_op, (env::Cell{3, 4}));
  EXPECT_EQ(out.info, env::StepEvent::kBlocked);
}

TEST(GridWorld, MovingIntoOccupiedCellIsBlocked) {
  // The opponent leaves (3,3) but the player may not take its old cell.
  const auto out = env::gridworld_step(grid({3, 2}, {3, 3}), kRight, kUp);
  EXPECT_EQ(out.next_state.pos_pl, (env::Cell{3, 2}));
  EXPECT_EQ(out.next_state.pos_op, (env::Cell{2, 3}));
}

TEST(GridWorld, SwapIsBlocked) {
  const auto out = env::gridworld_step(grid({3, 2}, {3, 3}), kRight, kLeft);
  EXPECT_EQ(out.next_state.pos_pl, (env::Cell{3, 2}));
  EXPECT_EQ(out.next_state.pos_op, (env::Cell{3, 3}));
}

TEST(GridWorld, OffGridStaysAndPays) {
  const auto out = env::gridworld_step(grid({1, 1}, {5, 6}), kUp, kDown);
  EXPECT_EQ(out.next_state.pos_pl, (env::Cell{1, 1}));
  EXPECT_EQ(out.next_state.pos_op, (env::Cell{5, 6}));
  EXPECT_DOUBLE_EQ(out.reward_pl, -0.02);
}

TEST(GridWorld, InvalidActionThrows) {
  EXPECT_THROW(env::gridworld_step(env::gridworld_reset(), 5, 0), std::out_of_range);
}

TEST(GridWorld, TimeoutAtCap) {
  env::GridWorldState s = env::gridworld_reset();
  s.step_count = 199;
  const auto out = env::gridworld_step(s, kLeft, kRight);
  EXPECT_TRUE(out.terminal);
  EXPECT_EQ(out.info, env::StepEvent::kTimeout);
  EXPECT_FALSE(out.absorbing());
}

// Every joint action from every reachable configuration: determinism and
// blocking safety.
TEST(GridWorld, DeterministicAndNeverCoLocated) {
  for (std::size_t i = 0; i < env::kGridCells; ++i) {
    for (std::size_t j = 0; j < env::kGridCells; ++j) {
      if (i == j) continue;
      const auto s = grid(env::cell_from_index(i), env::cell_from_index(j));
      for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t b = 0; b < 5; ++b) {
          const auto x = env::gridworld_step(s, a, b);
          const auto y = env::gridworld_step(s, a, b);
          EXPECT_EQ(x.next_state, y.next_state);
          EXPECT_EQ(x.reward_pl, y.reward_pl);
          EXPECT_NE(x.next_state.pos_pl, x.next_state.pos_op);
          EXPECT_EQ(x.terminal, x.info == env::StepEvent::kPickedUp);
        }
      }
    }
  }
}

// Attractor of the goal for the player when the opponent picks its action
// after seeing the player's: the states from which the player can force the
// pick-up.
std::set<sg::StateId> forced_win_states() {
  std::set<sg::StateId> win;
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < env::kGridCells; ++i) {
      for (std::size_t j = 0; j < env::kGridCells; ++j) {
        if (i == j) continue;
        const auto s = grid(env::cell_from_index(i), env::cell_from_index(j));
        const auto id = env::gridworld_index(s);
        if (win.count(id)) continue;
        for (std::size_t a = 0; a < 5 && !win.count(id); ++a) {
          bool forced = true;
          for (std::size_t b = 0; b < 5 && forced; ++b) {
            const auto out = env::gridworld_step(s, a, b);
            forced = out.info == env::StepEvent::kPickedUp ||
                     win.count(env::gridworld_index(out.next_state)) > 0;
          }
          if (forced) {
            win.insert(id);
            grew = true;
          }
        }
      }
    }
  }
  return win;
}

TEST(GridWorld, PerfectBlockerImpedesPlayer) {
  const auto win = forced_win_states();
  EXPECT_FALSE(win.count(env::gridworld_index(env::gridworld_reset())));

  const auto model = env::gridworld_model();
  const auto params = sg::RationalityParams::uniform(sg::kInfinity, -sg::kInfinity,
                                                     5, 5);
  const auto r = sg::solve_value_iteration(model, params, 1e-10, 10000);
  const double cost_only = -0.02 / (1 - 0.9);
  EXPECT_LE(r.value[env::gridworld_index(env::gridworld_reset())], cost_only + 1e-8);
}

TEST(GridWorld, ModelMatchesSimulator) {
  const auto model = env::gridworld_model();
  ASSERT_NO_THROW(model.validate());
  const auto s = grid({2, 5}, {4, 4});
  const auto id = env::gridworld_index(s);
  const auto out = env::gridworld_step(s, kRight, kUp);
  EXPECT_EQ(model.reward(id, kRight, kUp), out.reward_pl);
  ASSERT_EQ(model.successors(id, kRight, kUp).size(), 1u);
  EXPECT_EQ(model.successors(id, kRight, kUp)[0].next,
            env::gridworld_index(out.next_state));
}

env::PongState mid_court(double vx, double vy) {
  env::PongState s;
  s[env::PongState::kPlX] = -0.85;
  s[env::PongState::kOpX] = 0.85;
  s[env::PongState::kBallVx] = vx;
  s[env::PongState::kBallVy] = vy;
  return s;
}

TEST(Pong, FreeFlight) {
  const auto s = mid_court(0.03, 0.0);
  const auto out = env::pong_step(s, env::kPongStay, env::kPongStay);
  EXPECT_EQ(out.next_state[env::PongState::kBallX], 0.03);
  EXPECT_EQ(out.next_state[env::PongState::kBallY], 0.0);
  EXPECT_EQ(out.reward_pl, 0.0);
  EXPECT_FALSE(out.terminal);
}

TEST(Pong, PlayerScoresPastOpponentGoal) {
  auto s = mid_court(0.03, 0.0);
  s[env::PongState::kBallX] = 0.99;
  s[env::PongState::kOpY] = 0.8;  // paddle out of the way
  const auto out = env::pong_step(s, env::kPongStay, env::kPongStay);
  EXPECT_EQ(out.reward_pl, 1.0);
  EXPECT_TRUE(out.terminal);
  EXPECT_EQ(out.info, env::StepEvent::kScoredPl);
}

TEST(Pong, OpponentScoresPastPlayerGoal) {
  auto s = mid_court(-0.03, 0.0);
  s[env::PongState::kBallX] = -0.99;
  s[env::PongState::kPlY] = -0.8;
  const auto out = env::pong_step(s, env::kPongStay, env::kPongStay);
  EXPECT_EQ(out.reward_pl, -1.0);
  EXPECT_TRUE(out.terminal);
  EXPECT_EQ(out.info, env::StepEvent::kScoredOp);
}

TEST(Pong, PaddleReturnsBall) {
  auto s = mid_court(0.03, 0.0);
  s[env::PongState::kBallX] = 0.84;
  const auto out = env::pong_step(s, env::kPongStay, env::kPongStay);
  EXPECT_LT(out.next_state[env::PongState::kBallVx], 0.0);
  EXPECT_LE(out.next_state[env::PongState::kBallX], 0.85);
}

TEST(Pong, ActionCodec) {
  std::set<std::pair<int, int>> seen;
  for (std::size_t a = 0; a < env::kPongNumActions; ++a) {
    const auto act = env::decode_pong_action(a);
    EXPECT_EQ(env::encode_pong_action(act.h, act.v), a);
    seen.insert({act.h, act.v});
  }
  EXPECT_EQ(seen.size(), 9u);
  EXPECT_EQ(env::encode_pong_action(0, 0), env::kPongStay);
  EXPECT_THROW(env::decode_pong_action(9), std::out_of_range);
}

TEST(Pong, ResetIsSeeded) {
  EXPECT_EQ(env::pong_reset(7), env::pong_reset(7));
  const auto a = env::pong_reset(7), b = env::pong_reset(8);
  EXPECT_NE(std::atan2(a[env::PongState::kBallVy], a[env::PongState::kBallVx]),
            std::atan2(b[env::PongState::kBallVy], b[env::PongState::kBallVx]));
}

// Random rollouts: speed conserved, rewards in {-1, 0, 1} with at most one
// non-zero per episode, paddles in bounds, time in [0, 1].
TEST(Pong, RolloutInvariants) {
  sg::Rng rng(5);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto s = env::pong_reset(seed);
    const double speed = std::hypot(s[env::PongState::kBallVx],
                                    s[env::PongState::kBallVy]);
    int nonzero = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto out = env::pong_step(s, sg::uniform_index(rng, 9),
                                      sg::uniform_index(rng, 9));
      s = out.next_state;
      EXPECT_NEAR(std::hypot(s[env::PongState::kBallVx], s[env::PongState::kBallVy]),
                  speed, 1e-9);
      EXPECT_TRUE(out.reward_pl == 0.0 || std::abs(out.reward_pl) == 1.0);
      nonzero += out.reward_pl != 0.0;
      EXPECT_LE(std::abs(s[env::PongState::kPlY]), 0.85 + 1e-12);
      EXPECT_LE(std::abs(s[env::PongState::kBallY]), 1.0);
      EXPECT_GE(s[env::PongState::kTime], 0.0);
      EXPECT_LE(s[env::PongState::kTime], 1.0);
      if (out.terminal) {
        EXPECT_EQ(nonzero, out.info == env::StepEvent::kTimeout ? 0 : 1);
        break;
      }
      ASSERT_LT(t, 600);
    }
  }
}

TEST(PongDiscretize, BinCentresRoundTrip) {
  sg::Rng rng(2);
  for (int bins : {2, 4, 7}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::uint64_t index = 0, scale = 1;
      for (std::size_t d = 0; d < env::kPongStateDim; ++d) {
        index += sg::uniform_index(rng, bins) * scale;
        scale *= bins;
      }
      EXPECT_EQ(env::discretize_pong(env::pong_bin_centre(index, bins), bins), index);
    }
  }
}

TEST(PongDiscretize, SameAndAdjacentBins) {
  const auto ranges = env::pong_ranges();
  const int bins = 5;
  const auto centre = env::pong_bin_centre(0, bins);
  auto nudged = centre;
  nudged.v[8] += 0.1 * (ranges[8][1] - ranges[8][0]) / bins;
  EXPECT_EQ(env::discretize_pong(centre, bins), env::discretize_pong(nudged, bins));
  auto next = centre;
  next.v[8] += (ranges[8][1] - ranges[8][0]) / bins;
  EXPECT_NE(env::discretize_pong(centre, bins), env::discretize_pong(next, bins));
}

TEST(PongDiscretize, Errors) {
  EXPECT_THROW(env::discretize_pong(env::PongState{}, 1), std::invalid_argument);
  auto s = env::PongState{};
  s.v[0] = 3.0;
  EXPECT_THROW(env::discretize_pong(s, 4), std::out_of_range);
}

TEST(TabularEnvs, ModelConformance) {
  static_assert(env::TabularEnvironment<env::GridWorldEnv>);
  static_assert(env::TabularEnvironment<env::CoarsePongEnv>);
  static_assert(env::TabularEnvironment<env::ModelEnv>);
}

TEST(TabularEnvs, InternerOverflowAndRestore) {
  env::StateInterner interner(3);
  EXPECT_EQ(interner.intern(10), 0u);
  EXPECT_EQ(interner.intern(20), 1u);
  EXPECT_EQ(interner.intern(30), interner.overflow_id());
  EXPECT_EQ(interner.intern(10), 0u);
  EXPECT_EQ(interner.overflow_hits(), 1u);
  env::StateInterner copy(3);
  copy.restore(interner.keys());
  EXPECT_EQ(copy.find(20), 1u);
  EXPECT_EQ(copy.find(99), copy.overflow_id());
}

TEST(TabularEnvs, CoarsePongIdsAreStable) {
  env::CoarsePongEnv a, b;
  sg::Rng ra(4), rb(4);
  EXPECT_EQ(a.reset(ra), b.reset(rb));
  for (int t = 0; t < 300; ++t) {
    const auto x = a.step(t % 9, (t * 5) % 9);
    const auto y = b.step(t % 9, (t * 5) % 9);
    EXPECT_EQ(x.next, y.next);
    if (x.terminal) break;
  }
}

}  // namespace
