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

#ifndef SOFTGAMES_LEARNER_HPP_
#define SOFTGAMES_LEARNER_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
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

struct TrainConfig {
  double alpha = 0.5;
  double alpha2 = 0.05;
  bool alpha2_decay = true;
  int episodes = 1000;
  RationalityParams params;
  int eval_every = 10;
  std::uint64_t seed = 0;
  // Stop early once the Bellman error changes by less than 1e-3 (relative)
  // across 50 consecutive evaluation rows.
  bool stop_on_plateau = false;
  std::size_t estimator_window = 512;
  int max_episode_steps = 100000;

  void validate(bool estimation) const {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw std::invalid_argument("TrainConfig: alpha must lie in (0, 1]");
    }
    if (estimation && !(alpha2 > 0.0)) {
      throw std::invalid_argument("TrainConfig: alpha2 must be positive");
    }
    if (episodes < 0 || eval_every < 1) {
      throw std::invalid_argument("TrainConfig: bad episode counts");
    }
    params.validate();
  }
};

struct MetricsRow {
  int episode = 0;
  double mean_reward = 0.0;
  double bellman_error = 0.0;
  std::optional<double> beta_op_hat;
  double beta_pl = 0.0;
};

inline void write_metrics_csv(std::ostream& out,
                              const std::vector<MetricsRow>& rows) {
  out << "episode,mean_reward,bellman_error,beta_op_hat,beta_pl\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.episode << ',' << r.mean_reward << ',' << r.bellman_error << ',';
    if (r.beta_op_hat) out << *r.beta_op_hat;
    out << ',' << r.beta_pl << '\n';
  }
}

/// Maps (learner's Q, state) to the opponent's action distribution.
using OpponentPolicy =
    std::function<std::vector<double>(const JointQ&, StateId)>;

/// Opponent that plays the closed-form soft policy of whatever table the
/// learner currently holds, at its own (hidden) rationality.
inline OpponentPolicy shared_table_opponent(RationalityParams true_params) {
  return [p = std::move(true_params)](const JointQ& q, StateId s) {
    return opponent_policy(q, s, p);
  };
}

/// Opponent driven by its own fixed table.
inline OpponentPolicy frozen_table_opponent(JointQ table,
                                            RationalityParams true_params) {
  return [t = std::move(table), p = std::move(true_params)](const JointQ&,
                                                            StateId s) {
    return opponent_policy(t, s, p);
  };
}

inline OpponentPolicy reference_opponent(std::vector<double> rho_op) {
  return [rho = std::move(rho_op)](const JointQ&, StateId) { return rho; };
}

struct TrainResult {
  JointQ q;
  std::vector<MetricsRow> metrics;
  int episodes_run = 0;
};

struct EstimationResult {
  JointQ q;
  EstimatorState estimator;
  std::vector<MetricsRow> metrics;
  int episodes_run = 0;
  std::uint64_t transitions = 0;
};

namespace detail {

// Accumulates per-episode returns and absolute TD errors between rows.
class MetricsAccumulator {
 public:
  void add_td_error(double e) {
    td_sum_ += std::abs(e);
    ++td_count_;
  }
  void end_episode(double ret) {
    return_sum_ += ret;
    ++episodes_;
  }

  MetricsRow flush(int episode, double beta_pl,
                   std::optional<double> beta_op_hat) {
    MetricsRow row{episode,
                   episodes_ ? return_sum_ / episodes_ : 0.0,
                   td_count_ ? td_sum_ / static_cast<double>(td_count_) : 0.0,
                   beta_op_hat, beta_pl};
    *this = MetricsAccumulator{};
    return row;
  }

 private:
  double td_sum_ = 0.0;
  std::size_t td_count_ = 0;
  double return_sum_ = 0.0;
  int episodes_ = 0;
};

inline bool bellman_plateau(const std::vector<MetricsRow>& rows) {
  constexpr std::size_t kSpan = 50;
  if (rows.size() <= kSpan) return false;
  const double now = rows.back().bellman_error;
  const double then = rows[rows.size() - 1 - kSpan].bellman_error;
  return std::abs(now - then) < 1e-3 * std::max(std::abs(then), 1e-12);
}

inline double soft_td_error(const JointQ& q, const TransitionRecord& t,
                            const RationalityParams& params) {
  const double bootstrap = t.terminal ? 0.0 : state_value(q, t.s_next, params);
  return t.r + q.gamma() * bootstrap - q(t.s, t.a_pl, t.a_op);
}

template <envs::TabularEnvironment Env>
JointQ fresh_table(const Env& env) {
  return JointQ(env.n_states(), env.n_actions_pl(), env.n_actions_op(),
                env.gamma());
}

}  // namespace detail

/// Two-player soft Q-learning: both agents sample from the closed-form soft
/// policies of one shared table, which is updated by td_update.
template <envs::TabularEnvironment Env>
TrainResult train_tabular(Env& env, const TrainConfig& config) {
  config.validate(false);
  Rng rng(config.seed);
  TrainResult result{detail::fresh_table(env), {}, 0};
  JointQ& q = result.q;
  const RationalityParams& params = config.params;
  detail::MetricsAccumulator acc;
  std::uint64_t t = 0;

  for (int episode = 1; episode <= config.episodes; ++episode) {
    StateId s = env.reset(rng);
    double ret = 0.0;
    for (int step = 0; step < config.max_episode_steps; ++step) {
      const ActionId a_pl = sample_action(player_policy(q, s, params), rng);
      const ActionId a_op = sample_action(opponent_policy(q, s, params), rng);
      const auto out = env.step(a_pl, a_op);
      const TransitionRecord rec{s, a_pl, a_op, out.reward, out.next, t++,
                                 out.absorbing};
      acc.add_td_error(detail::soft_td_error(q, rec, params));
      td_update(q, rec, config.alpha, params);
      ret += out.reward;
      s = out.next;
      if (out.terminal) break;
    }
    acc.end_episode(ret);
    result.episodes_run = episode;
    if (episode % config.eval_every == 0) {
      result.metrics.push_back(acc.flush(episode, params.beta_pl, std::nullopt));
      if (config.stop_on_plateau && detail::bellman_plateau(result.metrics)) {
        break;
      }
    }
  }
  return result;
}

/// Soft Q-learning while estimating the opponent's beta online. The player
/// acts and bootstraps with the current estimate. After every transition the
/// estimate takes one likelihood-gradient step over a sliding window of the
/// most recent observations, each scored against the table it was drawn from.
template <envs::TabularEnvironment Env>
EstimationResult train_tabular_with_estimation(Env& env,
                                               const TrainConfig& config,
                                               double initial_beta_op_hat,
                                               const OpponentPolicy& opponent,
                                               std::uint64_t max_transitions = 0) {
  config.validate(true);
  Rng rng(config.seed);
  EstimationResult result{detail::fresh_table(env), {}, {}, 0, 0};
  JointQ& q = result.q;
  EstimatorState& est = result.estimator;
  est.beta_op_hat = initial_beta_op_hat;
  est.alpha2 = config.alpha2;
  est.decay = config.alpha2_decay;
  SlidingWindowLikelihood window(config.estimator_window, config.params.rho_op);
  detail::MetricsAccumulator acc;
  bool budget_spent = false;

  for (int episode = 1; episode <= config.episodes && !budget_spent; ++episode) {
    StateId s = env.reset(rng);
    double ret = 0.0;
    for (int step = 0; step < config.max_episode_steps; ++step) {
      const RationalityParams believed =
          config.params.with_beta_op(est.beta_op_hat);
      const ActionId a_pl = sample_action(player_policy(q, s, believed), rng);
      const ActionId a_op = sample_action(opponent(q, s), rng);
      window.add(marginal_q_opponent(q, s, believed), a_op);
      const auto out = env.step(a_pl, a_op);
      const TransitionRecord rec{s, a_pl, a_op, out.reward, out.next,
                                 result.transitions++, out.absorbing};
      acc.add_td_error(detail::soft_td_error(q, rec, believed));
      td_update(q, rec, config.alpha, believed);

      const auto eval = window.evaluate(est.beta_op_hat);
      apply_estimator_step(est, eval.loss, eval.grad);
      if (std::abs(est.beta_op_hat) >= kBetaEstimateLimit) {
        throw DivergenceError("beta_op estimate left [-1e4, 1e4]");
      }
      ret += out.reward;
      s = out.next;
      if (max_transitions && result.transitions >= max_transitions) {
        budget_spent = true;
        break;
      }
      if (out.terminal) break;
    }
    acc.end_episode(ret);
    result.episodes_run = episode;
    if (episode % config.eval_every == 0 || budget_spent) {
      result.metrics.push_back(
          acc.flush(episode, config.params.beta_pl, est.beta_op_hat));
      if (config.stop_on_plateau && detail::bellman_plateau(result.metrics)) {
        break;
      }
    }
  }
  return result;
}

struct EvalResult {
  double mean_reward = 0.0;
  double bellman_error = 0.0;
};

/// Plays `n_episodes` with the soft policies of a frozen table (opponent from
/// `opponent` if given) and reports mean return and mean |TD error|.
template <envs::TabularEnvironment Env>
EvalResult evaluate(Env& env, const JointQ& q, const RationalityParams& params,
                    int n_episodes, std::uint64_t seed,
                    const OpponentPolicy& opponent = {},
                    int max_episode_steps = 100000) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes < 1");
  Rng rng(seed);
  double return_sum = 0.0;
  double td_sum = 0.0;
  std::size_t td_count = 0;
  for (int episode = 0; episode < n_episodes; ++episode) {
    StateId s = env.reset(rng);
    for (int step = 0; step < max_episode_steps; ++step) {
      const ActionId a_pl = sample_action(player_policy(q, s, params), rng);
      const ActionId a_op = sample_action(
          opponent ? opponent(q, s) : opponent_policy(q, s, params), rng);
      const auto out = env.step(a_pl, a_op);
      const TransitionRecord rec{s, a_pl, a_op, out.reward, out.next, 0,
                                 out.absorbing};
      td_sum += std::abs(detail::soft_td_error(q, rec, params));
      ++td_count;
      return_sum += out.reward;
      s = out.next;
      if (out.terminal) break;
    }
  }
  return {return_sum / n_episodes,
          td_count ? td_sum / static_cast<double>(td_count) : 0.0};
}

}  // namespace softgames

#endif  // SOFTGAMES_LEARNER_HPP_
