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

#include "softgames/core/soft_ops.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "softgames/core/random.hpp"
#include "softgames/core/random_game.hpp"

namespace sg = softgames;

namespace {

constexpr double kInf = sg::kInfinity;

// One-state table holding the given 2x2 block.
sg::JointQ block_q(std::vector<double> block) {
  sg::JointQ q(1, 2, 2, 0.9);
  std::copy(block.begin(), block.end(), q.values().begin());
  return q;
}

sg::RationalityParams params22(double beta_pl, double beta_op) {
  return sg::RationalityParams::uniform(beta_pl, beta_op, 2, 2);
}

void expect_vec_near(const std::vector<double>& got,
                     const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
  }
}

TEST(MarginalQ, PlayerLimits) {
  const auto q = block_q({1, 0, 0, 1});
  expect_vec_near(sg::marginal_q_player(q, 0, params22(1, -kInf)), {0, 0}, 0);
  expect_vec_near(sg::marginal_q_player(q, 0, params22(1, 1e-9)), {0.5, 0.5}, 1e-9);
  const double l = std::log(0.5 * (1 + std::exp(1.0)));
  expect_vec_near(sg::marginal_q_player(q, 0, params22(1, 1)), {l, l}, 1e-15);
}

TEST(MarginalQ, Opponent) {
  expect_vec_near(sg::marginal_q_opponent(block_q({1, 0, 0, 1}), 0,
                                          params22(kInf, 1)),
                  {1, 1}, 0);
  expect_vec_near(sg::marginal_q_opponent(block_q({0, 0, 0, 0}), 0,
                                          params22(3.7, 1)),
                  {0, 0}, 0);
  // Columns are (0, 2) and (1, 3).
  const double c0 = std::log(0.5 * (1 + std::exp(2.0)));
  expect_vec_near(sg::marginal_q_opponent(block_q({0, 1, 2, 3}), 0,
                                          params22(1, 1)),
                  {c0, c0 + 1}, 1e-14);
  EXPECT_NEAR(c0, 1.4337808, 1e-7);
}

TEST(SoftValue, FromMarginal) {
  EXPECT_NEAR(sg::soft_value_from_marginal(std::vector{0.3, 0.3}, params22(-7, 1)),
              0.3, 1e-15);
  EXPECT_EQ(sg::soft_value_from_marginal(std::vector{1.0, 2.0}, params22(kInf, 1)),
            2.0);
  const double expected = 0.5 * std::log(0.5 * (1 + std::exp(2.0)));
  EXPECT_NEAR(sg::soft_value_from_marginal(std::vector{0.0, 1.0}, params22(2, 1)),
              expected, 1e-15);
  EXPECT_NEAR(expected, 0.7168904, 1e-7);
}

// Q block whose player marginal is exactly (x0, x1): constant rows.
sg::JointQ rows(double x0, double x1) { return block_q({x0, x0, x1, x1}); }

TEST(Policies, PlayerExamples) {
  expect_vec_near(sg::player_policy(rows(0.2, 3), 0, params22(1e-9, 1)),
                  {0.5, 0.5}, 1e-8);
  expect_vec_near(sg::player_policy(rows(1, 2), 0, params22(kInf, 1)), {0, 1}, 0);
  expect_vec_near(sg::player_policy(rows(0, std::log(3.0)), 0, params22(1, 1)),
                  {0.25, 0.75}, 1e-15);
}

TEST(Policies, OpponentExamples) {
  // Constant columns give the opponent marginal (x0, x1).
  auto cols = [](double x0, double x1) { return block_q({x0, x1, x0, x1}); };
  expect_vec_near(sg::opponent_policy(cols(0.2, 3), 0, params22(1, 1e-9)),
                  {0.5, 0.5}, 1e-8);
  expect_vec_near(sg::opponent_policy(cols(1, 2), 0, params22(1, -kInf)), {1, 0}, 0);
  expect_vec_near(sg::opponent_policy(cols(0, std::log(3.0)), 0, params22(1, -1)),
                  {0.75, 0.25}, 1e-15);
}

TEST(Policies, MatchBruteForceAndAreShiftInvariant) {
  sg::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t na = 2 + sg::uniform_index(rng, 4);
    const std::size_t nb = 2 + sg::uniform_index(rng, 4);
    sg::JointQ q(1, na, nb, 0.9);
    for (double& x : q.values()) x = sg::uniform_real(rng, -2, 2);
    const auto p = sg::RationalityParams::uniform(sg::uniform_real(rng, -10, 10),
                                                  sg::uniform_real(rng, -10, 10),
                                                  na, nb);
    const auto pi = sg::player_policy(q, 0, p);
    const auto ref = oracle::softmax(sg::marginal_q_player(q, 0, p), p.beta_pl);
    double sum = 0;
    for (std::size_t a = 0; a < na; ++a) {
      EXPECT_NEAR(pi[a], ref[a], 1e-12);
      EXPECT_GT(pi[a], 0.0);
      sum += pi[a];
    }
    EXPECT_NEAR(sum, 1.0, 1e-10);

    auto shifted = q;
    const double c = sg::uniform_real(rng, -50, 50);
    for (double& x : shifted.values()) x += c;
    const auto pi2 = sg::player_policy(shifted, 0, p);
    EXPECT_EQ(std::max_element(pi.begin(), pi.end()) - pi.begin(),
              std::max_element(pi2.begin(), pi2.end()) - pi2.begin());
  }
}

TEST(Policies, RejectNaN) {
  EXPECT_THROW(sg::player_policy(block_q({0, NAN, 0, 0}), 0, params22(1, 1)),
               std::invalid_argument);
}

TEST(BellmanBackup, ZeroDiscountIgnoresValue) {
  auto m = sg::random_game({3, 2, 2, 0.0, 1.0, 0}, 4);
  const auto p = params22(2, -3);
  const auto a = sg::bellman_backup(m, sg::SoftValue{{0, 0, 0}}, p);
  const auto b = sg::bellman_backup(m, sg::SoftValue{{5, -2, 9}}, p);
  EXPECT_EQ(a.values, b.values);
}

TEST(BellmanBackup, ConstantSelfLoop) {
  sg::GameModel m(1, 2, 2, 0.9);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) m.set_successors(0, a, b, {{0, 1.0}});
  }
  const auto v = sg::bellman_backup(m, sg::SoftValue{{10}}, params22(3, -2));
  EXPECT_NEAR(v[0], 9.0, 1e-14);
}

TEST(BellmanBackup, MatchesFormulaOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = sg::random_game({3, 2, 2, 0.9, 1.0, 0}, seed);
    sg::Rng rng(seed + 100);
    const auto v = oracle::random_vector(rng, 3, 2.0);
    const auto got = sg::bellman_backup(m, sg::SoftValue{v}, params22(3, -2));
    expect_vec_near(got.values, oracle::soft_backup(m, v, 3, -2), 1e-12);
  }
}

TEST(BellmanBackup, Contraction) {
  sg::Rng rng(99);
  for (double gamma : {0.5, 0.9, 0.99}) {
    for (int trial = 0; trial < 40; ++trial) {
      const auto m = sg::random_game(
          {2 + sg::uniform_index(rng, 4), 2 + sg::uniform_index(rng, 3),
           2 + sg::uniform_index(rng, 3), gamma, 1.0, 0},
          rng());
      auto beta = [&] {
        double b = 0;
        while (b == 0) b = sg::uniform_real(rng, -30, 30);
        return b;
      };
      const auto p = sg::RationalityParams::uniform(beta(), beta(),
                                                    m.n_actions_pl(),
                                                    m.n_actions_op());
      const sg::SoftValue v{oracle::random_vector(rng, m.n_states(), 5)};
      const sg::SoftValue w{oracle::random_vector(rng, m.n_states(), 5)};
      EXPECT_LE(sg::sup_distance(sg::bellman_backup(m, v, p),
                                 sg::bellman_backup(m, w, p)),
                gamma * sg::sup_distance(v, w) + 1e-10);
    }
  }
}

TEST(BellmanBackup, NestingOrderAgreesAtEqualTemperatures) {
  sg::Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    sg::JointQ q(1, 3, 4, 0.9);
    for (double& x : q.values()) x = sg::uniform_real(rng, -3, 3);
    const double beta = sg::uniform_real(rng, -20, 20);
    const auto p = sg::RationalityParams::uniform(beta, beta, 3, 4);
    EXPECT_NEAR(sg::state_value(q, 0, p), sg::state_value_opponent_first(q, 0, p),
                1e-10);
  }
}

TEST(BellmanBackup, NestingOrderDiffersAcrossTemperatures) {
  // Identity block, greedy player, indifferent opponent: the player-first
  // form averages each row, the opponent-first form maxes each column.
  const auto q = block_q({1, 0, 0, 1});
  const auto p = params22(kInf, 1e-12);
  EXPECT_NEAR(sg::state_value(q, 0, p), 0.5, 1e-12);
  EXPECT_NEAR(sg::state_value_opponent_first(q, 0, p), 1.0, 1e-12);
}

TEST(ValueIteration, ZeroDiscountIsOneBackup) {
  const auto m = sg::random_game({4, 2, 3, 0.0, 1.0, 0}, 8);
  const auto p = sg::RationalityParams::uniform(2, -1, 2, 3);
  const auto r = sg::solve_value_iteration(m, p, 1e-9, 100);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.value.values,
            sg::bellman_backup(m, sg::SoftValue{{0, 0, 0, 0}}, p).values);
}

TEST(ValueIteration, UniqueFixedPoint) {
  const double tol = 1e-9;
  sg::Rng rng(31);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = sg::random_game({4, 3, 2, 0.9, 1.0, 0}, seed);
    const auto p = sg::RationalityParams::uniform(4, -6, 3, 2);
    const auto base = sg::solve_value_iteration(m, p, tol, 10000);
    for (int start = 0; start < 10; ++start) {
      const auto r = sg::solve_value_iteration(
          m, p, tol, 10000, sg::SoftValue{oracle::random_vector(rng, 4, 20)});
      EXPECT_LE(sg::sup_distance(r.value, base.value), 2 * tol / (1 - 0.9));
    }
  }
}

TEST(ValueIteration, IterationBound) {
  const double tol = 1e-8;
  const auto m = sg::random_game({5, 2, 2, 0.8, 1.0, 0}, 2);
  const auto p = params22(1.5, 0.5);
  const auto v1 = sg::bellman_backup(m, sg::SoftValue{std::vector<double>(5, 0.0)}, p);
  double d1 = 0;
  for (double x : v1.values) d1 = std::max(d1, std::abs(x));
  const int bound = static_cast<int>(
      std::ceil(std::log(tol * (1 - 0.8) / d1) / std::log(0.8)));
  EXPECT_LE(sg::solve_value_iteration(m, p, tol, 10000).iterations, bound + 1);
}

TEST(ValueIteration, ThrowsWhenBudgetExhausted) {
  const auto m = sg::random_game({3, 2, 2, 0.99, 1.0, 0}, 1);
  EXPECT_THROW(sg::solve_value_iteration(m, params22(1, 1), 1e-12, 3),
               sg::ConvergenceError);
}

TEST(ValueIteration, PoliciesAreClosedForm) {
  const auto m = sg::random_game({3, 2, 3, 0.7, 1.0, 0}, 6);
  const auto p = sg::RationalityParams::uniform(5, -2, 2, 3);
  const auto r = sg::solve_value_iteration(m, p, 1e-10, 10000);
  for (sg::StateId s = 0; s < 3; ++s) {
    expect_vec_near({r.pi_pl.row(s).begin(), r.pi_pl.row(s).end()},
                    sg::player_policy(r.q, s, p), 0);
    expect_vec_near({r.pi_op.row(s).begin(), r.pi_op.row(s).end()},
                    sg::opponent_policy(r.q, s, p), 0);
  }
}

TEST(LimitEquivalence, TeamGame) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = sg::random_game({4, 2, 2, 0.8, 1.0, 0}, seed);
    const auto r = sg::solve_value_iteration(m, params22(1e4, 1e4), 1e-10, 10000);
    expect_vec_near(r.value.values, oracle::team_values(m, 1e-12), 1e-3);
  }
}

TEST(LimitEquivalence, ZeroSumPureSaddleGames) {
  int tested = 0;
  for (std::uint64_t seed = 0; tested < 10 && seed < 500; ++seed) {
    const auto m = sg::random_game({2, 2, 2, 0.8, 1.0, 0}, seed);
    const auto shapley = oracle::shapley_values(m, 1e-12);
    if (!oracle::all_pure_saddles(m, shapley)) continue;
    ++tested;
    const auto r = sg::solve_value_iteration(m, params22(1e4, -1e4), 1e-10, 10000);
    expect_vec_near(r.value.values, shapley, 1e-3);
  }
  EXPECT_EQ(tested, 10);
}

TEST(LimitEquivalence, MixedSaddleGivesMaxMin) {
  // Matching pennies: mixed value 0, sequential max-min -1.
  sg::GameModel m(1, 2, 2, 0.0);
  const double r[2][2] = {{1, -1}, {-1, 1}};
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      m.set_reward(0, a, b, r[a][b]);
      m.set_successors(0, a, b, {{0, 1.0}});
    }
  }
  EXPECT_FALSE(oracle::has_pure_saddle_2x2(1, -1, -1, 1));
  const auto v = sg::solve_value_iteration(m, params22(kInf, -kInf), 1e-9, 10);
  EXPECT_EQ(v.value[0], -1.0);
  EXPECT_EQ(oracle::matrix_game_2x2(1, -1, -1, 1), 0.0);
}

TEST(LimitEquivalence, IndifferentOpponentIsReferencePolicy) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = sg::random_game({4, 3, 2, 0.9, 1.0, 0}, seed);
    const auto p = sg::RationalityParams::uniform(3, 0, 3, 2);
    const auto r = sg::solve_value_iteration(m, p, 1e-12, 10000);
    expect_vec_near(r.value.values, oracle::uniform_opponent_values(m, 3, 1e-13),
                    1e-6);
  }
}

TEST(TdUpdate, Examples) {
  sg::JointQ q(2, 2, 2, 0.9);
  const auto p = params22(1, 1);
  const sg::TransitionRecord rec{0, 1, 0, 1.0, 1, 0, false};
  auto before = q;
  sg::td_update(q, rec, 0.0, p);
  EXPECT_EQ(q, before);
  EXPECT_EQ(sg::td_update(q, rec, 0.5, p), 0.5);
  for (double& x : q.state_block(1)) x = 2.0;
  const double target = 1.0 + 0.9 * sg::state_value(q, 1, p);
  EXPECT_EQ(sg::td_update(q, rec, 1.0, p), target);
  // Only the visited entry moves.
  EXPECT_EQ(q(0, 0, 0), 0.0);
  EXPECT_EQ(q(0, 0, 1), 0.0);
  EXPECT_EQ(q(0, 1, 1), 0.0);
  EXPECT_THROW(sg::td_update(q, rec, 1.5, p), std::invalid_argument);
  EXPECT_THROW(sg::td_update(q, {5, 0, 0, 0, 0, 0, false}, 0.5, p),
               std::out_of_range);
}

TEST(TdUpdate, TerminalDoesNotBootstrap) {
  sg::JointQ q(2, 2, 2, 0.9, 3.0);
  EXPECT_EQ(sg::td_update(q, {0, 0, 0, 1.0, 1, 0, true}, 1.0, params22(1, 1)), 1.0);
}

TEST(TdUpdate, ZeroDiscountLearnsRewardMatrix) {
  sg::JointQ q(1, 2, 3, 0.0);
  const double r[2][3] = {{1, -2, 0.5}, {3, 0.25, -1}};
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      sg::td_update(q, {0, a, b, r[a][b], 0, 0, false}, 1.0,
                    sg::RationalityParams::uniform(2, -3, 2, 3));
    }
  }
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(q(0, a, b), r[a][b]);
  }
}

TEST(SampleAction, Basics) {
  sg::Rng rng(1);
  const std::vector one_hot{0.0, 0.0, 1.0, 0.0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sg::sample_action(one_hot, rng), 2u);

  const std::vector uniform(5, 0.2);
  std::vector<int> counts(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sg::sample_action(uniform, rng)];
  const double sigma = std::sqrt(n * 0.2 * 0.8);
  for (int c : counts) EXPECT_LE(std::abs(c - n * 0.2), 3 * sigma);

  sg::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sg::sample_action(uniform, a), sg::sample_action(uniform, b));
  }
  EXPECT_THROW(sg::sample_action(std::vector<double>{0.5, NAN}, rng), std::invalid_argument);
}

}  // namespace
