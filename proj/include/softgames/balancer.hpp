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

#ifndef SOFTGAMES_BALANCER_HPP_
#define SOFTGAMES_BALANCER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "softgames/core/random.hpp"
#include "softgames/core/soft_ops.hpp"
#include "softgames/core/types.hpp"
#include "softgames/envs/tabular.hpp"
#include "softgames/estimator.hpp"

namespace softgames {

struct BalanceConfig {
  // Never refresh beta_pl: the unbalanced baseline.
  static constexpr int kNever = std::numeric_limits<int>::max();

  double delta = 0.0;
  int update_every = 10;
  double beta_pl_lo = 0.1;
  double beta_pl_hi = 100.0;

  void validate() const {
    if (!(beta_pl_lo < beta_pl_hi)) {
      throw std::invalid_argument("BalanceConfig: need beta_pl_lo < beta_pl_hi");
    }
    if (update_every < 1) {
      throw std::invalid_argument("BalanceConfig: update_every must be >= 1");
    }
    if (!std::isfinite(delta)) {
      throw std::invalid_argument("BalanceConfig: delta must be finite");
    }
  }
};

/// beta_pl = |beta_op_hat| + delta, clamped to the configured bounds.
inline double balance(double beta_op_hat, const BalanceConfig& cfg) {
  if (!std::isfinite(beta_op_hat)) {
    throw std::invalid_argument("balance: beta_op_hat must be finite");
  }
  return std::clamp(std::abs(beta_op_hat) + cfg.delta, cfg.beta_pl_lo,
                    cfg.beta_pl_hi);
}

struct BalanceRow {
  int episode = 0;
  double beta_op_hat = 0.0;
  double beta_pl = 0.0;
  double delta = 0.0;
  double avg_reward = 0.0;  // running mean episode return
};

inline void write_balance_csv(std::ostream& out,
                              const std::vector<BalanceRow>& rows) {
  out << "episode,beta_op_hat,beta_pl,delta,avg_reward\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.episode << ',' << r.beta_op_hat << ',' << r.beta_pl << ','
        << r.delta << ',' << r.avg_reward << '\n';
  }
}

struct BalancedPlayOptions {
  int episodes = 500;
  std::uint64_t seed = 0;
  // Starting beta_pl; when unset, balance() of the initial estimate.
  std::optional<double> initial_beta_pl;
  // The opponent's hidden rationality; it plays the closed-form soft policy
  // of the frozen table against the player's current beta_pl.
  double true_beta_op = -20.0;
  int max_episode_steps = 100000;
};

struct BalanceResult {
  std::vector<BalanceRow> rows;  // one per episode
  std::vector<double> returns;
  EstimatorState estimator;
  double beta_pl = 0.0;

  double mean_return() const {
    if (returns.empty()) return 0.0;
    double total = 0.0;
    for (double r : returns) total += r;
    return total / static_cast<double>(returns.size());
  }
};

/// Plays against a frozen table while estimating the opponent's beta after
/// every episode and refreshing beta_pl = balance(beta_op_hat) every
/// `update_every` episodes. The table is never updated.
template <envs::TabularEnvironment Env>
BalanceResult balanced_play(Env& env, const JointQ& q, EstimatorState estimator,
                            const BalanceConfig& cfg,
                            const BalancedPlayOptions& opts) {
  cfg.validate();
  if (opts.episodes < 0) throw std::invalid_argument("balanced_play: episodes < 0");
  Rng rng(opts.seed);
  BalanceResult result;
  result.beta_pl =
      opts.initial_beta_pl.value_or(balance(estimator.beta_op_hat, cfg));
  const auto base = RationalityParams::uniform(
      result.beta_pl, estimator.beta_op_hat, q.n_actions_pl(),
      q.n_actions_op());
  double total_return = 0.0;

  for (int episode = 1; episode <= opts.episodes; ++episode) {
    const RationalityParams believed =
        base.with_beta_pl(result.beta_pl).with_beta_op(estimator.beta_op_hat);
    const RationalityParams truth = believed.with_beta_op(opts.true_beta_op);
    RoundDataset round;
    double ret = 0.0;
    StateId s = env.reset(rng);
    for (int step = 0; step < opts.max_episode_steps; ++step) {
      const ActionId a_pl = sample_action(player_policy(q, s, believed), rng);
      const ActionId a_op = sample_action(opponent_policy(q, s, truth), rng);
      round.records.push_back({s, a_pl, a_op});
      const auto out = env.step(a_pl, a_op);
      ret += out.reward;
      s = out.next;
      if (out.terminal) break;
    }
    sgd_step(estimator, round, q, believed);
    if (std::abs(estimator.beta_op_hat) >= kBetaEstimateLimit) {
      throw DivergenceError("beta_op estimate left [-1e4, 1e4]");
    }
    if (cfg.update_every != BalanceConfig::kNever &&
        episode % cfg.update_every == 0) {
      result.beta_pl = balance(estimator.beta_op_hat, cfg);
    }
    total_return += ret;
    result.returns.push_back(ret);
    result.rows.push_back({episode, estimator.beta_op_hat, result.beta_pl,
                           cfg.delta, total_return / episode});
  }
  result.estimator = std::move(estimator);
  return result;
}

}  // namespace softgames

#endif  // SOFTGAMES_BALANCER_HPP_
