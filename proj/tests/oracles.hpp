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

// Reference implementations used only by tests. They are written straight
// from the defining formulas, in long double and without stabilisation, so
// that they share no code with the library under test.

#ifndef SOFTGAMES_TESTS_ORACLES_HPP_
#define SOFTGAMES_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "softgames/core/random.hpp"
#include "softgames/core/types.hpp"

namespace oracle {

using softgames::GameModel;
using softgames::StateId;

// (1/beta) log sum_i w_i exp(beta v_i), with the three limit branches.
inline long double lse(const std::vector<long double>& v,
                       const std::vector<double>& w, double beta) {
  if (std::isinf(beta)) {
    return beta > 0 ? *std::max_element(v.begin(), v.end())
                    : *std::min_element(v.begin(), v.end());
  }
  if (std::abs(beta) < 1e-8) {
    long double m = 0;
    for (std::size_t i = 0; i < v.size(); ++i) m += w[i] * v[i];
    return m;
  }
  long double z = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    z += w[i] * std::exp(static_cast<long double>(beta) * v[i]);
  }
  return std::log(z) / beta;
}

inline std::vector<long double> widen(const std::vector<double>& v) {
  return {v.begin(), v.end()};
}

// Q(s, a, b) = R + gamma * E[v(s')], evaluated per joint action.
inline long double q_entry(const GameModel& m, const std::vector<double>& v,
                           StateId s, std::size_t a, std::size_t b) {
  long double q = m.reward(s, a, b);
  for (const auto& [next, p] : m.successors(s, a, b)) {
    q += m.gamma() * static_cast<long double>(p) * v[next];
  }
  return q;
}

// Player-first nested soft value of one state.
inline long double soft_state_value(const GameModel& m,
                                    const std::vector<double>& v, StateId s,
                                    double beta_pl, double beta_op) {
  const std::size_t na = m.n_actions_pl(), nb = m.n_actions_op();
  const std::vector<double> rho_pl(na, 1.0 / na), rho_op(nb, 1.0 / nb);
  std::vector<long double> marginal(na);
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<long double> row(nb);
    for (std::size_t b = 0; b < nb; ++b) row[b] = q_entry(m, v, s, a, b);
    marginal[a] = lse(row, rho_op, beta_op);
  }
  return lse(marginal, rho_pl, beta_pl);
}

// Player-first nested soft value of a row-major na x nb matrix, uniform
// reference policies.
inline long double matrix_value(const std::vector<double>& q, std::size_t na,
                                std::size_t nb, double beta_pl, double beta_op) {
  const std::vector<double> rho_pl(na, 1.0 / na), rho_op(nb, 1.0 / nb);
  std::vector<long double> marginal(na);
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<long double> row(q.begin() + a * nb, q.begin() + (a + 1) * nb);
    marginal[a] = lse(row, rho_op, beta_op);
  }
  return lse(marginal, rho_pl, beta_pl);
}

inline std::vector<double> soft_backup(const GameModel& m,
                                       const std::vector<double>& v,
                                       double beta_pl, double beta_op) {
  std::vector<double> out(m.n_states());
  for (StateId s = 0; s < m.n_states(); ++s) {
    out[s] = static_cast<double>(soft_state_value(m, v, s, beta_pl, beta_op));
  }
  return out;
}

template <class Backup>
std::vector<double> iterate(const GameModel& m, Backup backup, double tol) {
  std::vector<double> v(m.n_states(), 0.0);
  for (int k = 0; k < 100000; ++k) {
    auto next = backup(v);
    double delta = 0;
    for (std::size_t s = 0; s < v.size(); ++s) {
      delta = std::max(delta, std::abs(next[s] - v[s]));
    }
    v = std::move(next);
    if (delta <= tol) break;
  }
  return v;
}

// Classical max-max (team) value iteration.
inline std::vector<double> team_values(const GameModel& m, double tol) {
  return iterate(
      m,
      [&](const std::vector<double>& v) {
        std::vector<double> out(m.n_states());
        for (StateId s = 0; s < m.n_states(); ++s) {
          long double best = -std::numeric_limits<long double>::infinity();
          for (std::size_t a = 0; a < m.n_actions_pl(); ++a) {
            for (std::size_t b = 0; b < m.n_actions_op(); ++b) {
              best = std::max(best, q_entry(m, v, s, a, b));
            }
          }
          out[s] = static_cast<double>(best);
        }
        return out;
      },
      tol);
}

// Value of the 2x2 zero-sum matrix game [[a, b], [c, d]] (row player
// maximises), including the mixed-strategy case.
inline double matrix_game_2x2(double a, double b, double c, double d) {
  const double maxmin = std::max(std::min(a, b), std::min(c, d));
  const double minmax = std::min(std::max(a, c), std::max(b, d));
  if (maxmin == minmax) return maxmin;
  return (a * d - b * c) / (a + d - b - c);
}

inline bool has_pure_saddle_2x2(double a, double b, double c, double d) {
  return std::max(std::min(a, b), std::min(c, d)) ==
         std::min(std::max(a, c), std::max(b, d));
}

// Shapley's minimax value iteration for games with 2x2 action sets.
inline std::vector<double> shapley_values(const GameModel& m, double tol) {
  return iterate(
      m,
      [&](const std::vector<double>& v) {
        std::vector<double> out(m.n_states());
        for (StateId s = 0; s < m.n_states(); ++s) {
          auto q = [&](std::size_t a, std::size_t b) {
            return static_cast<double>(q_entry(m, v, s, a, b));
          };
          out[s] = matrix_game_2x2(q(0, 0), q(0, 1), q(1, 0), q(1, 1));
        }
        return out;
      },
      tol);
}

// True when every state's matrix game at the Shapley fixed point has a pure
// saddle point.
inline bool all_pure_saddles(const GameModel& m, const std::vector<double>& v) {
  for (StateId s = 0; s < m.n_states(); ++s) {
    auto q = [&](std::size_t a, std::size_t b) {
      return static_cast<double>(q_entry(m, v, s, a, b));
    };
    if (!has_pure_saddle_2x2(q(0, 0), q(0, 1), q(1, 0), q(1, 1))) return false;
  }
  return true;
}

// Soft single-agent value iteration on the MDP obtained by letting the
// opponent play uniformly at random.
inline std::vector<double> uniform_opponent_values(const GameModel& m,
                                                   double beta_pl, double tol) {
  const std::size_t na = m.n_actions_pl(), nb = m.n_actions_op();
  const std::vector<double> rho_pl(na, 1.0 / na);
  return iterate(
      m,
      [&](const std::vector<double>& v) {
        std::vector<double> out(m.n_states());
        for (StateId s = 0; s < m.n_states(); ++s) {
          std::vector<long double> q(na, 0);
          for (std::size_t a = 0; a < na; ++a) {
            for (std::size_t b = 0; b < nb; ++b) q[a] += q_entry(m, v, s, a, b);
            q[a] /= nb;
          }
          out[s] = static_cast<double>(lse(q, rho_pl, beta_pl));
        }
        return out;
      },
      tol);
}

// pi(a) = rho_a exp(beta x_a) / sum_b rho_b exp(beta x_b), by direct sums.
inline std::vector<double> softmax(const std::vector<double>& x, double beta) {
  std::vector<long double> e(x.size());
  long double z = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(beta) * x[i]) / x.size();
    z += e[i];
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(e[i] / z);
  return out;
}

inline std::vector<double> random_vector(softgames::Rng& rng, std::size_t n,
                                         double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = softgames::uniform_real(rng, -scale, scale);
  return v;
}

}  // namespace oracle

#endif  // SOFTGAMES_TESTS_ORACLES_HPP_
