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

#ifndef SOFTGAMES_SERVER_SESSION_HPP_
#define SOFTGAMES_SERVER_SESSION_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>

#include "softgames/balancer.hpp"
#include "softgames/core/lse.hpp"
#include "softgames/core/random.hpp"
#include "softgames/core/soft_ops.hpp"
#include "softgames/estimator.hpp"
#include "softgames/envs/pong.hpp"
#include "softgames/server/policy_source.hpp"
#include "softgames/server/protocol.hpp"

namespace softgames::server {

struct SessionConfig {
  BalanceConfig balance;  // update_every is ignored: rebalance after each episode
  double initial_beta_op_hat = 0.0;
  double alpha2 = 3.0;  // per-tick records: many per step
  bool decay = true;
  std::uint64_t seed = 0;
};

/// One live game against a human opponent. Owns all mutable state of the
/// connection; the policy source is shared and read-only.
class PlaySession {
 public:
  PlaySession(std::shared_ptr<const PolicySource> source, SessionConfig cfg)
      : source_(std::move(source)), cfg_(cfg), rng_(cfg.seed) {
    if (!source_) throw std::invalid_argument("PlaySession: null policy source");
    cfg_.balance.validate();
    estimator_.beta_op_hat = cfg_.initial_beta_op_hat;
    estimator_.alpha2 = cfg_.alpha2;
    estimator_.decay = cfg_.decay;
    beta_pl_ = balance(estimator_.beta_op_hat, cfg_.balance);
    start_episode();
  }

  /// Applies one client message; on ProtocolError the session is untouched.
  ClientMessage handle_text(std::string_view text) {
    auto msg = parse_client_message(text);
    std::visit([this](const auto& m) { apply(m); }, msg);
    return msg;
  }

  void apply(const ActionMessage& m) { human_action_ = m.index(); }
  void apply(const ConfigMessage& m) {
    BalanceConfig next = cfg_.balance;
    next.delta = m.delta;
    next.validate();
    cfg_.balance = next;
    beta_pl_ = balance(estimator_.beta_op_hat, cfg_.balance);
  }
  void apply(const ResetMessage&) {
    score_ = {};
    start_episode();
  }

  /// Frame describing the current state without advancing time.
  StateFrame frame() const {
    StateFrame f;
    f.tick = tick_;
    f.state = state_;
    f.beta_op_hat = estimator_.beta_op_hat;
    f.beta_pl = beta_pl_;
    f.delta = cfg_.balance.delta;
    f.episode = episode_;
    f.score = score_;
    f.terminal = pending_reset_;
    return f;
  }

  /// Advances one tick. After a terminal frame the next tick serves a new
  /// ball instead of moving.
  StateFrame step() {
    ++tick_;
    if (pending_reset_) {
      ++episode_;
      start_episode();
      return frame();
    }
    observe_and_decide(since_decision_ == 0);
    since_decision_ = (since_decision_ + 1) % source_->ticks_per_decision();
    const auto out = envs::pong_step(state_, agent_action_, human_action_, source_->pong());
    state_ = out.next_state;
    if (out.terminal) finish_episode(out.reward_pl);
    return frame();
  }

  double beta_pl() const { return beta_pl_; }
  double beta_op_hat() const { return estimator_.beta_op_hat; }
  const EstimatorState& estimator() const { return estimator_; }
  const BalanceConfig& balance_config() const { return cfg_.balance; }
  std::size_t human_action() const { return human_action_; }
  std::uint64_t tick() const { return tick_; }
  std::uint64_t episode() const { return episode_; }
  const Score& score() const { return score_; }
  const envs::PongState& state() const { return state_; }
  std::size_t pending_records() const { return round_.m(); }

  /// Agent's belief about the game: its own beta_pl and the estimated beta_op.
  RationalityParams believed() const {
    return RationalityParams::uniform(beta_pl_, estimator_.beta_op_hat,
                                      envs::kPongNumActions, envs::kPongNumActions);
  }

 private:
  void start_episode() {
    state_ = envs::pong_reset(rng_(), source_->pong());
    since_decision_ = 0;
    agent_action_ = envs::kPongStay;
    pending_reset_ = false;
    round_ = RoundStats{};
    round_.n_actions = envs::kPongNumActions;
    round_.rho_op = uniform_distribution(envs::kPongNumActions);
  }

  // Records the human's held action with its certainty-equivalent row at this
  // tick, and on decision ticks samples a fresh agent action.
  void observe_and_decide(bool decision_tick) {
    const auto q = source_->joint_q(state_);
    const auto params = believed();
    constexpr std::size_t n = envs::kPongNumActions;
    std::vector<double> m_op(n);
    softgames::detail::marginal_opponent_block(q, n, n, params, m_op);
    round_.q_op.insert(round_.q_op.end(), m_op.begin(), m_op.end());
    round_.actions.push_back(human_action_);
    if (!decision_tick) return;
    std::vector<double> m_pl(n);
    softgames::detail::marginal_player_block(q, n, n, params, m_pl);
    agent_action_ = sample_action(softmax_beta(m_pl, params.rho_pl, params.beta_pl), rng_);
  }

  void finish_episode(double reward_pl) {
    if (reward_pl > 0.0) ++score_.player;
    if (reward_pl < 0.0) ++score_.opponent;
    if (round_.m() > 0) sgd_step(estimator_, std::move(round_));
    beta_pl_ = balance(estimator_.beta_op_hat, cfg_.balance);
    round_ = RoundStats{};
    pending_reset_ = true;
  }

  std::shared_ptr<const PolicySource> source_;
  SessionConfig cfg_;
  Rng rng_;
  EstimatorState estimator_;
  double beta_pl_ = 0.0;
  envs::PongState state_;
  RoundStats round_;
  std::size_t human_action_ = envs::kPongStay;
  std::size_t agent_action_ = envs::kPongStay;
  int since_decision_ = 0;
  std::uint64_t tick_ = 0;
  std::uint64_t episode_ = 0;
  Score score_;
  bool pending_reset_ = false;
};

}  // namespace softgames::server

#endif  // SOFTGAMES_SERVER_SESSION_HPP_
