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

#ifndef SOFTGAMES_DEEP_TRAIN_HPP_
#define SOFTGAMES_DEEP_TRAIN_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "softgames/core/lse.hpp"
#include "softgames/core/random.hpp"
#include "softgames/core/soft_ops.hpp"
#include "softgames/core/types.hpp"
#include "softgames/deep/network.hpp"
#include "softgames/deep/replay.hpp"

namespace softgames::deep {

/// A transition with real-vector states.
struct DeepTransition {
  std::vector<double> s;
  ActionId a_pl = 0;
  ActionId a_op = 0;
  double r = 0.0;
  std::vector<double> s_next;
  bool terminal = false;  // absorbing: the target drops the bootstrap term
};

/// Frozen copy of the online network used for bootstrap targets.
struct TargetParams {
  QNetworkParams params;
  std::uint64_t steps_since_sync = 0;
};

inline TargetParams& sync_target(const QNetworkParams& online,
                                 TargetParams& target) {
  target.params = online;
  target.steps_since_sync = 0;
  return target;
}

namespace detail {

inline void check_rationality(const QNetworkParams& p,
                              const RationalityParams& r) {
  r.validate();
  if (r.rho_pl.size() != p.shape.n_actions_pl ||
      r.rho_op.size() != p.shape.n_actions_op) {
    throw std::invalid_argument("deep: rationality shape does not match network");
  }
  if (!std::isfinite(r.beta_pl) || !std::isfinite(r.beta_op)) {
    throw std::invalid_argument("deep: beta must be finite");
  }
}

inline double matrix_value(std::span<const double> block, const NetworkShape& shape,
                           const RationalityParams& r) {
  return softgames::detail::block_value(block, shape.n_actions_pl,
                                        shape.n_actions_op, r);
}

}  // namespace detail

/// Player-first soft value of the network's joint Q matrix at `state`.
inline double soft_value_net(const QNetworkParams& p, std::span<const double> state,
                             const RationalityParams& r) {
  detail::check_rationality(p, r);
  const auto out = forward(p, state);
  return detail::matrix_value(out, p.shape, r);
}

struct NetPolicies {
  std::vector<double> pl;
  std::vector<double> op;
};

/// Closed-form soft policies of both agents from one output matrix.
inline NetPolicies policies_from_matrix(std::span<const double> block,
                                        const NetworkShape& shape,
                                        const RationalityParams& r) {
  std::vector<double> m_pl(shape.n_actions_pl), m_op(shape.n_actions_op);
  softgames::detail::marginal_player_block(block, shape.n_actions_pl,
                                           shape.n_actions_op, r, m_pl);
  softgames::detail::marginal_opponent_block(block, shape.n_actions_pl,
                                             shape.n_actions_op, r, m_op);
  return {softmax_beta(m_pl, r.rho_pl, r.beta_pl),
          softmax_beta(m_op, r.rho_op, r.beta_op)};
}

struct LossResult {
  double loss = 0.0;
  QNetworkGrads grads;
};

/// Mean squared soft-Bellman residual over the batch and its gradient with
/// respect to the online parameters only.
inline LossResult loss_batch(const QNetworkParams& online, const TargetParams& target,
                             std::span<const DeepTransition* const> batch,
                             const RationalityParams& r, double gamma) {
  if (batch.empty()) throw std::invalid_argument("loss_batch: empty batch");
  detail::check_rationality(online, r);
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("loss_batch: gamma must lie in [0, 1)");
  }
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto in = static_cast<Eigen::Index>(online.shape.input);
  Eigen::MatrixXd x(in, n), x_next(in, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = *batch[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(t.s.size()) != in ||
        static_cast<Eigen::Index>(t.s_next.size()) != in) {
      throw std::invalid_argument("loss_batch: state has the wrong dimension");
    }
    if (t.a_pl >= online.shape.n_actions_pl || t.a_op >= online.shape.n_actions_op) {
      throw std::out_of_range("loss_batch: action out of range");
    }
    x.col(j) = Eigen::Map<const Eigen::VectorXd>(t.s.data(), in);
    x_next.col(j) = Eigen::Map<const Eigen::VectorXd>(t.s_next.data(), in);
  }
  const Eigen::MatrixXd next_out = forward_batch(target.params, x_next).out;
  const ForwardCache cache = forward_batch(online, x);

  const auto n_out = static_cast<std::size_t>(cache.out.rows());
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(cache.out.rows(), n);
  LossResult result;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = *batch[static_cast<std::size_t>(j)];
    double y = t.r;
    if (!t.terminal) {
      const std::span<const double> block(next_out.col(j).data(), n_out);
      y += gamma * detail::matrix_value(block, online.shape, r);
    }
    const auto unit =
        static_cast<Eigen::Index>(t.a_pl * online.shape.n_actions_op + t.a_op);
    const double residual = cache.out(unit, j) - y;
    result.loss += residual * residual;
    d_out(unit, j) = 2.0 * residual / static_cast<double>(n);
  }
  result.loss /= static_cast<double>(n);
  result.grads = backward(online, cache, d_out);
  return result;
}

/// Episodic environment with real-vector observations.
template <typename E>
concept VectorEnvironment = requires(E env, Rng& rng, std::size_t a) {
  { env.n_actions_pl() } -> std::convertible_to<std::size_t>;
  { env.n_actions_op() } -> std::convertible_to<std::size_t>;
  env.reset(rng);
  { env.step(a, a).reward } -> std::convertible_to<double>;
  { env.step(a, a).terminal } -> std::convertible_to<bool>;
  { env.step(a, a).absorbing } -> std::convertible_to<bool>;
  env.step(a, a).next;
};

struct DeepConfig {
  RationalityParams params = RationalityParams::uniform(20, -50, 9, 9);
  NetworkShape shape;
  double gamma = 0.99;
  double lr = 1e-4;
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 50000;
  std::uint64_t target_sync = 3000;
  std::uint64_t total_steps = 100000;
  std::size_t learning_starts = 1000;  // replay size before the first update
  int max_episode_steps = 100000;
  std::uint64_t seed = 0;

  void validate() const {
    params.validate();
    if (!std::isfinite(params.beta_pl) || !std::isfinite(params.beta_op)) {
      throw std::invalid_argument("DeepConfig: beta must be finite");
    }
    if (params.rho_pl.size() != shape.n_actions_pl ||
        params.rho_op.size() != shape.n_actions_op) {
      throw std::invalid_argument("DeepConfig: rationality shape does not match network");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("DeepConfig: gamma");
    if (!(lr > 0.0)) throw std::invalid_argument("DeepConfig: lr must be positive");
    if (batch_size == 0 || replay_capacity < batch_size) {
      throw std::invalid_argument("DeepConfig: need 0 < batch_size <= replay_capacity");
    }
    if (target_sync == 0) throw std::invalid_argument("DeepConfig: target_sync must be >= 1");
    if (max_episode_steps < 1) throw std::invalid_argument("DeepConfig: max_episode_steps");
  }
};

struct DeepEpisodeRow {
  int episode = 0;
  std::uint64_t step = 0;  // environment steps so far
  double reward = 0.0;     // episode return
  double mean_loss = 0.0;  // over the updates made during the episode
};

struct DeepTrainResult {
  QNetworkParams params;
  std::vector<DeepEpisodeRow> episodes;
  std::uint64_t steps = 0;
  std::uint64_t updates = 0;

  /// Mean return over the last `n` episodes (all when fewer).
  double mean_recent_reward(std::size_t n) const {
    if (episodes.empty()) return 0.0;
    const std::size_t k = std::min(n, episodes.size());
    double total = 0.0;
    for (std::size_t i = episodes.size() - k; i < episodes.size(); ++i) {
      total += episodes[i].reward;
    }
    return total / static_cast<double>(k);
  }
};

/// Soft Q-learning with replay and a target network. Both agents act from the
/// online network's matrix; exploration comes only from the finite betas.
template <VectorEnvironment Env>
DeepTrainResult train_deep(Env& env, const DeepConfig& cfg) {
  cfg.validate();
  if (env.n_actions_pl() != cfg.shape.n_actions_pl ||
      env.n_actions_op() != cfg.shape.n_actions_op) {
    throw std::invalid_argument("train_deep: env actions do not match network");
  }
  Rng rng(cfg.seed);
  DeepTrainResult result;
  result.params = QNetworkParams::init(cfg.shape, rng());
  TargetParams target;
  sync_target(result.params, target);
  Adam adam(result.params, cfg.lr);
  ReplayMemory<DeepTransition> replay(cfg.replay_capacity);
  const std::size_t starts = std::max(cfg.learning_starts, cfg.batch_size);

  int episode = 0;
  while (result.steps < cfg.total_steps) {
    ++episode;
    const auto first = env.reset(rng);
    std::vector<double> s(first.begin(), first.end());
    double ret = 0.0, loss_sum = 0.0;
    std::uint64_t updates = 0;
    for (int t = 0; t < cfg.max_episode_steps && result.steps < cfg.total_steps; ++t) {
      const auto out = forward(result.params, s);
      const auto pi = policies_from_matrix(out, cfg.shape, cfg.params);
      const ActionId a_pl = sample_action(pi.pl, rng);
      const ActionId a_op = sample_action(pi.op, rng);
      const auto step = env.step(a_pl, a_op);
      ++result.steps;
      ret += step.reward;
      std::vector<double> next(step.next.begin(), step.next.end());
      replay.push({s, a_pl, a_op, step.reward, next, step.absorbing});
      s = std::move(next);

      if (replay.size() >= starts) {
        const auto batch = replay.sample(cfg.batch_size, rng);
        const auto loss = loss_batch(result.params, target, batch, cfg.params, cfg.gamma);
        if (!std::isfinite(loss.loss)) {
          throw DivergenceError("train_deep: non-finite loss");
        }
        adam.step(result.params, loss.grads);
        loss_sum += loss.loss;
        ++updates;
        ++result.updates;
        if (++target.steps_since_sync >= cfg.target_sync) {
          sync_target(result.params, target);
        }
      }
      if (step.terminal) break;
    }
    result.episodes.push_back({episode, result.steps, ret,
                               updates ? loss_sum / static_cast<double>(updates) : 0.0});
  }
  return result;
}

/// Mean episode return with both agents on the soft policies of `params`.
template <VectorEnvironment Env>
double evaluate_deep(Env& env, const QNetworkParams& params,
                     const RationalityParams& r, int episodes, std::uint64_t seed,
                     int max_episode_steps = 100000) {
  detail::check_rationality(params, r);
  if (episodes < 1) throw std::invalid_argument("evaluate_deep: episodes < 1");
  Rng rng(seed);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const auto first = env.reset(rng);
    std::vector<double> s(first.begin(), first.end());
    for (int t = 0; t < max_episode_steps; ++t) {
      const auto pi = policies_from_matrix(forward(params, s), params.shape, r);
      const auto step = env.step(sample_action(pi.pl, rng), sample_action(pi.op, rng));
      total += step.reward;
      s.assign(step.next.begin(), step.next.end());
      if (step.terminal) break;
    }
  }
  return total / episodes;
}

}  // namespace softgames::deep

#endif  // SOFTGAMES_DEEP_TRAIN_HPP_
