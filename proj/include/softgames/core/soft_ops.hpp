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

#ifndef SOFTGAMES_CORE_SOFT_OPS_HPP_
#define SOFTGAMES_CORE_SOFT_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "softgames/core/lse.hpp"
#include "softgames/core/random.hpp"
#include "softgames/core/types.hpp"

namespace softgames {

namespace detail {

inline void check_state(std::size_t n_states, StateId s, const char* what) {
  if (s >= n_states) {
    throw std::out_of_range(std::string(what) + ": state index out of range");
  }
}

inline void check_params_shape(const RationalityParams& params,
                               std::size_t n_pl, std::size_t n_op) {
  if (params.rho_pl.size() != n_pl || params.rho_op.size() != n_op) {
    throw std::invalid_argument(
        "reference policy sizes do not match the action sets");
  }
}

inline void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite Q entry");
    }
  }
}

// Marginals of a row-major [n_pl][n_op] block; no validation.
inline void marginal_player_block(std::span<const double> block,
                                  std::size_t n_pl, std::size_t n_op,
                                  const RationalityParams& params,
                                  std::span<double> out) {
  for (std::size_t a = 0; a < n_pl; ++a) {
    out[a] = lse_beta_unchecked(block.subspan(a * n_op, n_op), params.rho_op,
                                params.beta_op);
  }
}

inline void marginal_opponent_block(std::span<const double> block,
                                    std::size_t n_pl, std::size_t n_op,
                                    const RationalityParams& params,
                                    std::span<double> out) {
  std::vector<double> column(n_pl);
  for (std::size_t b = 0; b < n_op; ++b) {
    for (std::size_t a = 0; a < n_pl; ++a) column[a] = block[a * n_op + b];
    out[b] = lse_beta_unchecked(column, params.rho_pl, params.beta_pl);
  }
}

// Player-first soft value of one joint block.
inline double block_value(std::span<const double> block, std::size_t n_pl,
                          std::size_t n_op, const RationalityParams& params) {
  std::vector<double> marginal(n_pl);
  marginal_player_block(block, n_pl, n_op, params, marginal);
  return lse_beta_unchecked(marginal, params.rho_pl, params.beta_pl);
}

}  // namespace detail

/// Player's certainty equivalent: each row of Q(s, ., .) soft-marginalised
/// over the opponent's actions at the opponent's temperature.
inline std::vector<double> marginal_q_player(const JointQ& q, StateId s,
                                             const RationalityParams& params) {
  detail::check_state(q.n_states(), s, "marginal_q_player");
  detail::check_params_shape(params, q.n_actions_pl(), q.n_actions_op());
  const auto block = q.state_block(s);
  detail::check_finite(block, "marginal_q_player");
  std::vector<double> out(q.n_actions_pl());
  detail::marginal_player_block(block, q.n_actions_pl(), q.n_actions_op(),
                                params, out);
  return out;
}

/// Opponent's certainty equivalent: columns marginalised at the player's
/// temperature.
inline std::vector<double> marginal_q_opponent(
    const JointQ& q, StateId s, const RationalityParams& params) {
  detail::check_state(q.n_states(), s, "marginal_q_opponent");
  detail::check_params_shape(params, q.n_actions_pl(), q.n_actions_op());
  const auto block = q.state_block(s);
  detail::check_finite(block, "marginal_q_opponent");
  std::vector<double> out(q.n_actions_op());
  detail::marginal_opponent_block(block, q.n_actions_pl(), q.n_actions_op(),
                                  params, out);
  return out;
}

inline double soft_value_from_marginal(std::span<const double> q_pl_marginal,
                                       const RationalityParams& params) {
  return lse_beta(q_pl_marginal, params.rho_pl, params.beta_pl);
}

/// Canonical (player-first) soft state value of Q at s.
inline double state_value(const JointQ& q, StateId s,
                          const RationalityParams& params) {
  return soft_value_from_marginal(marginal_q_player(q, s, params), params);
}

/// Opponent-first nesting. Equal to state_value when beta_pl == beta_op;
/// otherwise only a diagnostic.
inline double state_value_opponent_first(const JointQ& q, StateId s,
                                         const RationalityParams& params) {
  return lse_beta(marginal_q_opponent(q, s, params), params.rho_op,
                  params.beta_op);
}

inline std::vector<double> player_policy(const JointQ& q, StateId s,
                                         const RationalityParams& params) {
  return softmax_beta(marginal_q_player(q, s, params), params.rho_pl,
                      params.beta_pl);
}

/// Negative beta_op puts the mass on low certainty-equivalent actions.
inline std::vector<double> opponent_policy(const JointQ& q, StateId s,
                                           const RationalityParams& params) {
  return softmax_beta(marginal_q_opponent(q, s, params), params.rho_op,
                      params.beta_op);
}

/// Q(s, a_pl, a_op) = R + gamma * E[v(s')] for every joint action.
inline JointQ induced_q(const GameModel& model, const SoftValue& v) {
  if (v.size() != model.n_states()) {
    throw std::invalid_argument("induced_q: value vector has wrong size");
  }
  JointQ q = JointQ::like(model);
  const double gamma = model.gamma();
  for (StateId s = 0; s < model.n_states(); ++s) {
    for (ActionId a = 0; a < model.n_actions_pl(); ++a) {
      for (ActionId b = 0; b < model.n_actions_op(); ++b) {
        double cont = 0.0;
        for (const auto& [next, prob] : model.successors(s, a, b)) {
          cont += prob * v[next];
        }
        q(s, a, b) = model.reward(s, a, b) + gamma * cont;
      }
    }
  }
  return q;
}

/// Free-energy Bellman operator in its player-first closed form.
inline SoftValue bellman_backup(const GameModel& model, const SoftValue& v,
                                const RationalityParams& params) {
  detail::check_params_shape(params, model.n_actions_pl(),
                             model.n_actions_op());
  const JointQ q = induced_q(model, v);
  SoftValue out{std::vector<double>(model.n_states())};
  for (StateId s = 0; s < model.n_states(); ++s) {
    out[s] = detail::block_value(q.state_block(s), q.n_actions_pl(),
                                 q.n_actions_op(), params);
    if (!std::isfinite(out[s])) {
      throw DivergenceError("bellman_backup: non-finite value");
    }
  }
  return out;
}

inline SoftValue bellman_backup_opponent_first(
    const GameModel& model, const SoftValue& v,
    const RationalityParams& params) {
  const JointQ q = induced_q(model, v);
  SoftValue out{std::vector<double>(model.n_states())};
  for (StateId s = 0; s < model.n_states(); ++s) {
    out[s] = state_value_opponent_first(q, s, params);
  }
  return out;
}

inline PolicyTable policy_table(const JointQ& q, const RationalityParams& params,
                                Agent owner) {
  PolicyTable table;
  table.owner = owner;
  table.n_actions =
      owner == Agent::kPlayer ? q.n_actions_pl() : q.n_actions_op();
  table.probs.reserve(q.n_states() * table.n_actions);
  for (StateId s = 0; s < q.n_states(); ++s) {
    const auto row = owner == Agent::kPlayer ? player_policy(q, s, params)
                                             : opponent_policy(q, s, params);
    table.probs.insert(table.probs.end(), row.begin(), row.end());
  }
  return table;
}

struct ValueIterationResult {
  SoftValue value;
  JointQ q;
  PolicyTable pi_pl;
  PolicyTable pi_op;
  int iterations = 0;
  double last_delta = 0.0;
};

/// Iterates bellman_backup from `initial` (zero by default) until successive
/// iterates are within `tol` in sup-norm.
inline ValueIterationResult solve_value_iteration(
    const GameModel& model, const RationalityParams& params, double tol,
    int max_iters, std::optional<SoftValue> initial = std::nullopt) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("solve_value_iteration: tol must be positive");
  }
  model.validate();
  params.validate();
  SoftValue v = initial ? *initial
                        : SoftValue{std::vector<double>(model.n_states(), 0.0)};
  if (v.size() != model.n_states()) {
    throw std::invalid_argument("solve_value_iteration: bad initial vector");
  }
  ValueIterationResult result;
  for (int k = 1; k <= max_iters; ++k) {
    SoftValue next = bellman_backup(model, v, params);
    result.last_delta = sup_distance(next, v);
    v = std::move(next);
    result.iterations = k;
    // With gamma == 0 the operator ignores its argument: one backup is exact.
    if (result.last_delta <= tol || model.gamma() == 0.0) {
      result.q = induced_q(model, v);
      result.pi_pl = policy_table(result.q, params, Agent::kPlayer);
      result.pi_op = policy_table(result.q, params, Agent::kOpponent);
      result.value = std::move(v);
      return result;
    }
  }
  throw ConvergenceError("solve_value_iteration: max_iters exceeded (delta " +
                         std::to_string(result.last_delta) + ")");
}

/// One tabular soft TD step on the visited entry; returns its new value.
inline double td_update(JointQ& q, const TransitionRecord& t, double alpha,
                        const RationalityParams& params) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("td_update: alpha must lie in [0, 1]");
  }
  if (t.s >= q.n_states() || t.s_next >= q.n_states() ||
      t.a_pl >= q.n_actions_pl() || t.a_op >= q.n_actions_op()) {
    throw std::out_of_range("td_update: transition indices out of range");
  }
  const double bootstrap =
      t.terminal ? 0.0
                 : detail::block_value(q.state_block(t.s_next), q.n_actions_pl(),
                                       q.n_actions_op(), params);
  const double target = t.r + q.gamma() * bootstrap;
  double& entry = q(t.s, t.a_pl, t.a_op);
  entry = alpha == 1.0 ? target : entry + alpha * (target - entry);
  return entry;
}

}  // namespace softgames

#endif  // SOFTGAMES_CORE_SOFT_OPS_HPP_
