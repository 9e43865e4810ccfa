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

#ifndef SOFTGAMES_CORE_TYPES_HPP_
#define SOFTGAMES_CORE_TYPES_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "softgames/core/lse.hpp"

namespace softgames {

using StateId = std::size_t;
using ActionId = std::size_t;

// Raised when an iteration or estimate leaves its numeric safety envelope.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when value iteration runs out of iterations before reaching tol.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Agent { kPlayer, kOpponent };

/// Explicit tabular two-player stochastic game. Transitions are stored
/// sparsely: each joint action owns a contiguous run of (next, prob) pairs.
class GameModel {
 public:
  struct Successor {
    StateId next;
    double prob;
  };

  GameModel() = default;
  GameModel(std::size_t n_states, std::size_t n_actions_pl,
            std::size_t n_actions_op, double gamma)
      : n_states_(n_states),
        n_actions_pl_(n_actions_pl),
        n_actions_op_(n_actions_op),
        gamma_(gamma),
        reward_(n_states * n_actions_pl * n_actions_op, 0.0),
        successors_(n_states * n_actions_pl * n_actions_op) {}

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions_pl() const { return n_actions_pl_; }
  std::size_t n_actions_op() const { return n_actions_op_; }
  double gamma() const { return gamma_; }

  std::size_t joint_index(StateId s, ActionId a_pl, ActionId a_op) const {
    return (s * n_actions_pl_ + a_pl) * n_actions_op_ + a_op;
  }

  double reward(StateId s, ActionId a_pl, ActionId a_op) const {
    return reward_[joint_index(s, a_pl, a_op)];
  }
  void set_reward(StateId s, ActionId a_pl, ActionId a_op, double r) {
    reward_[joint_index(s, a_pl, a_op)] = r;
  }

  std::span<const Successor> successors(StateId s, ActionId a_pl,
                                        ActionId a_op) const {
    return successors_[joint_index(s, a_pl, a_op)];
  }
  void set_successors(StateId s, ActionId a_pl, ActionId a_op,
                      std::vector<Successor> next) {
    successors_[joint_index(s, a_pl, a_op)] = std::move(next);
  }
  // Dense probability row; convenient for small random games.
  void set_transition_row(StateId s, ActionId a_pl, ActionId a_op,
                          std::span<const double> probs) {
    std::vector<Successor> next;
    for (std::size_t t = 0; t < probs.size(); ++t) {
      if (probs[t] != 0.0) next.push_back({t, probs[t]});
    }
    set_successors(s, a_pl, a_op, std::move(next));
  }

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const {
    if (n_states_ == 0 || n_actions_pl_ == 0 || n_actions_op_ == 0) {
      throw std::invalid_argument("GameModel: empty state or action set");
    }
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
      throw std::invalid_argument("GameModel: gamma must lie in [0, 1)");
    }
    for (double r : reward_) {
      if (!std::isfinite(r)) {
        throw std::invalid_argument("GameModel: rewards must be finite");
      }
    }
    for (const auto& row : successors_) {
      double sum = 0.0;
      for (const auto& [next, prob] : row) {
        if (next >= n_states_ || !(prob >= 0.0)) {
          throw std::invalid_argument("GameModel: invalid transition entry");
        }
        sum += prob;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument(
            "GameModel: transition probabilities must sum to 1");
      }
    }
  }

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_pl_ = 0;
  std::size_t n_actions_op_ = 0;
  double gamma_ = 0.0;
  std::vector<double> reward_;
  std::vector<std::vector<Successor>> successors_;
};

/// Inverse temperatures of both agents and their reference policies.
struct RationalityParams {
  double beta_pl = 1.0;
  double beta_op = 1.0;
  std::vector<double> rho_pl;
  std::vector<double> rho_op;

  static RationalityParams uniform(double beta_pl, double beta_op,
                                   std::size_t n_actions_pl,
                                   std::size_t n_actions_op) {
    return {beta_pl, beta_op, uniform_distribution(n_actions_pl),
            uniform_distribution(n_actions_op)};
  }

  RationalityParams with_beta_op(double beta) const {
    RationalityParams copy = *this;
    copy.beta_op = beta;
    return copy;
  }
  RationalityParams with_beta_pl(double beta) const {
    RationalityParams copy = *this;
    copy.beta_pl = beta;
    return copy;
  }

  void validate() const {
    if (std::isnan(beta_pl) || std::isnan(beta_op)) {
      throw std::invalid_argument("RationalityParams: beta is NaN");
    }
    validate_distribution(rho_pl, "RationalityParams.rho_pl");
    validate_distribution(rho_op, "RationalityParams.rho_op");
  }
};

/// Dense (state, player action, opponent action) -> soft Q table. Carries
/// the discount it was learned under so a checkpoint is self-describing.
class JointQ {
 public:
  JointQ() = default;
  JointQ(std::size_t n_states, std::size_t n_actions_pl,
         std::size_t n_actions_op, double gamma, double fill = 0.0)
      : n_states_(n_states),
        n_actions_pl_(n_actions_pl),
        n_actions_op_(n_actions_op),
        gamma_(gamma),
        values_(n_states * n_actions_pl * n_actions_op, fill) {}

  static JointQ like(const GameModel& model) {
    return JointQ(model.n_states(), model.n_actions_pl(), model.n_actions_op(),
                  model.gamma());
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions_pl() const { return n_actions_pl_; }
  std::size_t n_actions_op() const { return n_actions_op_; }
  double gamma() const { return gamma_; }

  double& operator()(StateId s, ActionId a_pl, ActionId a_op) {
    return values_[(s * n_actions_pl_ + a_pl) * n_actions_op_ + a_op];
  }
  double operator()(StateId s, ActionId a_pl, ActionId a_op) const {
    return values_[(s * n_actions_pl_ + a_pl) * n_actions_op_ + a_op];
  }

  // Row-major [a_pl][a_op] block of one state.
  std::span<const double> state_block(StateId s) const {
    const std::size_t width = n_actions_pl_ * n_actions_op_;
    return std::span<const double>(values_).subspan(s * width, width);
  }
  std::span<double> state_block(StateId s) {
    const std::size_t width = n_actions_pl_ * n_actions_op_;
    return std::span<double>(values_).subspan(s * width, width);
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const JointQ& other) const {
    return n_states_ == other.n_states_ &&
           n_actions_pl_ == other.n_actions_pl_ &&
           n_actions_op_ == other.n_actions_op_;
  }

  friend bool operator==(const JointQ&, const JointQ&) = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_pl_ = 0;
  std::size_t n_actions_op_ = 0;
  double gamma_ = 0.0;
  std::vector<double> values_;
};

struct SoftValue {
  std::vector<double> values;

  double operator[](StateId s) const { return values[s]; }
  double& operator[](StateId s) { return values[s]; }
  std::size_t size() const { return values.size(); }
};

inline double sup_distance(const SoftValue& a, const SoftValue& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("sup_distance: size mismatch");
  }
  double d = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    d = std::max(d, std::abs(a[s] - b[s]));
  }
  return d;
}

/// Per-state action distribution of one agent, stored row-major.
struct PolicyTable {
  Agent owner = Agent::kPlayer;
  std::size_t n_actions = 0;
  std::vector<double> probs;

  std::span<const double> row(StateId s) const {
    return std::span<const double>(probs).subspan(s * n_actions, n_actions);
  }
  std::size_t n_states() const {
    return n_actions == 0 ? 0 : probs.size() / n_actions;
  }
};

/// One sampled interaction. `terminal` marks a true episode end (no
/// bootstrap); time-limit truncation is not terminal.
struct TransitionRecord {
  StateId s = 0;
  ActionId a_pl = 0;
  ActionId a_op = 0;
  double r = 0.0;
  StateId s_next = 0;
  std::uint64_t t = 0;
  bool terminal = false;
};

}  // namespace softgames

#endif  // SOFTGAMES_CORE_TYPES_HPP_
