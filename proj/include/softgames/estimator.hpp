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

#ifndef SOFTGAMES_ESTIMATOR_HPP_
#define SOFTGAMES_ESTIMATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "softgames/core/lse.hpp"
#include "softgames/core/soft_ops.hpp"
#include "softgames/core/types.hpp"

namespace softgames {

// Estimates are clamped here; reaching the bound counts as divergence.
inline constexpr double kBetaEstimateLimit = 1e4;

/// Observed (s, a_pl, a_op) triples of one round.
struct RoundDataset {
  struct Record {
    StateId s = 0;
    ActionId a_pl = 0;
    ActionId a_op = 0;
  };
  std::vector<Record> records;

  std::size_t m() const { return records.size(); }
};

namespace detail {

inline void check_estimation_inputs(const RoundDataset& data, const JointQ& q,
                                    const RationalityParams& params) {
  if (data.records.empty()) {
    throw std::invalid_argument("estimator: empty dataset");
  }
  if (std::isinf(params.beta_pl) || params.beta_pl == 0.0 ||
      std::isnan(params.beta_pl)) {
    throw std::domain_error(
        "estimator: beta_pl must be finite and non-zero for estimation");
  }
  for (const auto& r : data.records) {
    if (r.s >= q.n_states() || r.a_op >= q.n_actions_op() ||
        r.a_pl >= q.n_actions_pl()) {
      throw std::out_of_range("estimator: record indices out of range");
    }
  }
}

// log pi_op(a) for every a, given the opponent's certainty equivalents.
// log pi(a) = log rho(a) + beta * (q_op(a) - lse_beta(q_op, rho, beta)).
inline void log_policy_from_marginal(std::span<const double> q_op,
                                     std::span<const double> rho, double beta,
                                     std::span<double> out) {
  const double lse = lse_beta_unchecked(q_op, rho, beta);
  for (std::size_t a = 0; a < q_op.size(); ++a) {
    // Rounding can push a near-certain action marginally above zero.
    out[a] = std::min(0.0, std::log(rho[a]) + beta * (q_op[a] - lse));
  }
}

}  // namespace detail

/// Sum over the round of log pi*_op(a_op | s) at the given beta_op, with the
/// opponent policy built from q exactly as opponent_policy does.
inline double log_likelihood(const RoundDataset& data, const JointQ& q,
                             double beta_op, const RationalityParams& params) {
  detail::check_estimation_inputs(data, q, params);
  if (!std::isfinite(beta_op)) {
    throw std::domain_error("log_likelihood: beta_op must be finite");
  }
  std::vector<double> log_pi(q.n_actions_op());
  double total = 0.0;
  for (const auto& r : data.records) {
    const auto q_op = marginal_q_opponent(q, r.s, params);
    detail::log_policy_from_marginal(q_op, params.rho_op, beta_op, log_pi);
    total += log_pi[r.a_op];
  }
  return total;
}

/// d/d(beta_op) of log_likelihood in closed form:
///
///   (1/beta_pl) * sum_i [ log Z(s_i, a_i) - sum_a pi*_op(a | s_i) log Z(s_i, a) ]
///
/// where Z(s, a_op) = sum_{a_pl} rho_pl(a_pl) exp(beta_pl * Q(s, a_pl, a_op)).
inline double grad_beta_op(const RoundDataset& data, const JointQ& q,
                           double beta_op, const RationalityParams& params) {
  detail::check_estimation_inputs(data, q, params);
  if (!std::isfinite(beta_op)) {
    throw std::domain_error("grad_beta_op: beta_op must be finite");
  }
  const std::size_t n_op = q.n_actions_op();
  std::vector<double> log_z(n_op);
  double total = 0.0;
  for (const auto& r : data.records) {
    // log Z = beta_pl * (certainty equivalent), computed without overflow.
    const auto q_op = marginal_q_opponent(q, r.s, params);
    for (std::size_t a = 0; a < n_op; ++a) log_z[a] = params.beta_pl * q_op[a];
    const auto pi = softmax_beta(q_op, params.rho_op, beta_op);
    double expected = 0.0;
    for (std::size_t a = 0; a < n_op; ++a) expected += pi[a] * log_z[a];
    total += log_z[r.a_op] - expected;
  }
  return total / params.beta_pl;
}

/// Per-round sufficient statistics: each record's certainty-equivalent row
/// (log Z / beta_pl) and observed action. Enough to re-evaluate the round's
/// loss at any beta without the raw states.
struct RoundStats {
  std::size_t n_actions = 0;
  std::vector<double> q_op;  // m x n_actions, row-major
  std::vector<ActionId> actions;
  std::vector<double> rho_op;

  std::size_t m() const { return actions.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(q_op).subspan(i * n_actions, n_actions);
  }
};

inline RoundStats round_stats(const RoundDataset& data, const JointQ& q,
                              const RationalityParams& params) {
  detail::check_estimation_inputs(data, q, params);
  RoundStats stats;
  stats.n_actions = q.n_actions_op();
  stats.rho_op = params.rho_op;
  stats.q_op.reserve(data.m() * stats.n_actions);
  for (const auto& r : data.records) {
    const auto q_op = marginal_q_opponent(q, r.s, params);
    stats.q_op.insert(stats.q_op.end(), q_op.begin(), q_op.end());
    stats.actions.push_back(r.a_op);
  }
  return stats;
}

/// Negative log-likelihood of a round at beta.
inline double round_loss(const RoundStats& stats, double beta) {
  std::vector<double> log_pi(stats.n_actions);
  double total = 0.0;
  for (std::size_t i = 0; i < stats.m(); ++i) {
    detail::log_policy_from_marginal(stats.row(i), stats.rho_op, beta, log_pi);
    total += log_pi[stats.actions[i]];
  }
  return -total;
}

/// d/d(beta) of the round's log-likelihood (ascent direction).
inline double round_gradient(const RoundStats& stats, double beta) {
  double total = 0.0;
  for (std::size_t i = 0; i < stats.m(); ++i) {
    const auto row = stats.row(i);
    const auto pi = softmax_beta(row, stats.rho_op, beta);
    double expected = 0.0;
    for (std::size_t a = 0; a < stats.n_actions; ++a) expected += pi[a] * row[a];
    total += row[stats.actions[i]] - expected;
  }
  return total;
}

struct EstimatorState {
  double beta_op_hat = 0.0;
  double alpha2 = 0.05;
  // Step j uses alpha2 / sqrt(j) when set.
  bool decay = true;
  std::vector<double> loss_history;  // L_j at the estimate used in round j
  std::vector<double> beta_history;  // that estimate
  std::vector<double> grad_history;
  double cumulative_loss = 0.0;
  std::size_t round = 0;
  // Keep RoundStats of every round so regret can be evaluated afterwards.
  bool retain_rounds = false;
  std::vector<RoundStats> rounds;

  double step_size() const {
    return decay ? alpha2 / std::sqrt(static_cast<double>(round + 1)) : alpha2;
  }
};

/// Records the round's loss at the current estimate, then takes one gradient
/// ascent step on the log-likelihood. Returns the gradient.
inline double apply_estimator_step(EstimatorState& state, double loss,
                                   double grad) {
  if (!std::isfinite(grad) || !std::isfinite(loss)) {
    throw DivergenceError("estimator: non-finite gradient or loss");
  }
  state.loss_history.push_back(loss);
  state.beta_history.push_back(state.beta_op_hat);
  state.grad_history.push_back(grad);
  state.cumulative_loss += loss;
  state.beta_op_hat = std::clamp(state.beta_op_hat + state.step_size() * grad,
                                 -kBetaEstimateLimit, kBetaEstimateLimit);
  ++state.round;
  return grad;
}

/// One step from precomputed per-record Q_op rows.
inline double sgd_step(EstimatorState& state, RoundStats stats) {
  if (stats.q_op.size() != stats.m() * stats.n_actions ||
      stats.rho_op.size() != stats.n_actions) {
    throw std::invalid_argument("sgd_step: inconsistent round statistics");
  }
  for (ActionId a : stats.actions) {
    if (a >= stats.n_actions) throw std::out_of_range("sgd_step: action out of range");
  }
  const double beta = state.beta_op_hat;
  const double loss = round_loss(stats, beta);
  const double grad = round_gradient(stats, beta);
  if (state.retain_rounds) state.rounds.push_back(std::move(stats));
  return apply_estimator_step(state, loss, grad);
}

inline double sgd_step(EstimatorState& state, const RoundDataset& data,
                       const JointQ& q, const RationalityParams& params) {
  RoundStats stats = round_stats(data, q, params);
  const double beta = state.beta_op_hat;
  const double loss = round_loss(stats, beta);
  const double grad = round_gradient(stats, beta);
  if (state.retain_rounds) state.rounds.push_back(std::move(stats));
  return apply_estimator_step(state, loss, grad);
}

inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("make_grid: bad range");
  }
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(lo + step * i);
  return grid;
}

inline std::vector<double> default_regret_grid() {
  return make_grid(-50.0, 50.0, 0.25);
}

struct Minimum {
  double argmin = 0.0;
  double value = 0.0;
};

/// Grid search, then golden-section refinement inside the neighbouring grid
/// cells. The losses are convex in beta, so the refinement is safe.
template <typename Loss>
Minimum minimise_on_grid(const Loss& loss, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("regret: empty comparator grid");
  std::size_t best = 0;
  double best_value = loss(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = loss(grid[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = grid[best > 0 ? best - 1 : best];
  double hi = grid[best + 1 < grid.size() ? best + 1 : best];
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = loss(x1);
  double f2 = loss(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = loss(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = loss(x2);
    }
  }
  Minimum m{grid[best], best_value};
  for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f < m.value) m = {x, f};
  }
  return m;
}

struct StaticRegret {
  double regret = 0.0;      // clamped at zero
  double raw = 0.0;         // online loss minus comparator loss
  double online_loss = 0.0;
  double comparator_loss = 0.0;
  double comparator = 0.0;  // best fixed beta
};

inline void check_regret_inputs(const EstimatorState& state) {
  if (state.round == 0 || state.loss_history.empty()) {
    throw std::invalid_argument("regret: empty history");
  }
  if (state.rounds.size() != state.loss_history.size()) {
    throw std::invalid_argument(
        "regret: round statistics were not retained (set retain_rounds)");
  }
}

/// sum_j L_j(beta_j) - min_u sum_j L_j(u), comparator from a grid.
inline StaticRegret static_regret_report(const EstimatorState& state,
                                         std::span<const double> u_grid) {
  check_regret_inputs(state);
  auto total_loss = [&](double u) {
    double total = 0.0;
    for (const auto& r : state.rounds) total += round_loss(r, u);
    return total;
  };
  const Minimum best = minimise_on_grid(total_loss, u_grid);
  StaticRegret out;
  out.online_loss = state.cumulative_loss;
  out.comparator_loss = best.value;
  out.comparator = best.argmin;
  out.raw = out.online_loss - out.comparator_loss;
  out.regret = std::max(0.0, out.raw);
  return out;
}

inline double static_regret(const EstimatorState& state,
                            std::span<const double> u_grid) {
  return static_regret_report(state, u_grid).regret;
}

struct DynamicRegret {
  double regret = 0.0;
  // sum_j (u*_{j+1} - u*_j)^2 over the per-round optima.
  double path_length = 0.0;
  std::vector<double> optima;
};

/// Per-round comparators; `grids` holds one grid per round or a single grid
/// shared by all rounds.
inline DynamicRegret dynamic_regret(const EstimatorState& state,
                                    std::span<const std::vector<double>> grids) {
  check_regret_inputs(state);
  if (grids.size() != 1 && grids.size() != state.rounds.size()) {
    throw std::invalid_argument("dynamic_regret: need one grid or one per round");
  }
  DynamicRegret out;
  double comparator = 0.0;
  for (std::size_t j = 0; j < state.rounds.size(); ++j) {
    const auto& grid = grids.size() == 1 ? grids[0] : grids[j];
    const auto& stats = state.rounds[j];
    const Minimum best =
        minimise_on_grid([&](double u) { return round_loss(stats, u); }, grid);
    comparator += best.value;
    if (!out.optima.empty()) {
      const double jump = best.argmin - out.optima.back();
      out.path_length += jump * jump;
    }
    out.optima.push_back(best.argmin);
  }
  out.regret = std::max(0.0, state.cumulative_loss - comparator);
  return out;
}

inline DynamicRegret dynamic_regret(const EstimatorState& state,
                                    std::span<const double> u_grid) {
  const std::vector<std::vector<double>> one{
      std::vector<double>(u_grid.begin(), u_grid.end())};
  return dynamic_regret(state, one);
}

/// Likelihood over the most recent `capacity` observations. Each observation
/// keeps the opponent's certainty equivalents from the table it acted on, so
/// later updates of that table cannot leak the observed action back into its
/// own likelihood term.
class SlidingWindowLikelihood {
 public:
  SlidingWindowLikelihood(std::size_t capacity, std::vector<double> rho_op)
      : capacity_(capacity),
        n_actions_(rho_op.size()),
        rho_(std::move(rho_op)),
        rows_(capacity * n_actions_),
        actions_(capacity) {
    if (capacity == 0) throw std::invalid_argument("window capacity is zero");
    validate_distribution(rho_, "SlidingWindowLikelihood");
    for (double r : rho_) log_rho_.push_back(std::log(r));
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  void add(std::span<const double> q_op_row, ActionId a_op) {
    if (q_op_row.size() != n_actions_ || a_op >= n_actions_) {
      throw std::invalid_argument("SlidingWindowLikelihood: bad observation");
    }
    const std::size_t slot = (head_ + size_) % capacity_;
    std::copy(q_op_row.begin(), q_op_row.end(), rows_.begin() + slot * n_actions_);
    actions_[slot] = a_op;
    if (size_ < capacity_) {
      ++size_;
    } else {
      head_ = (head_ + 1) % capacity_;
    }
  }

  struct Evaluation {
    double loss = 0.0;  // negative log-likelihood
    double grad = 0.0;  // d log-likelihood / d beta
  };

  Evaluation evaluate(double beta_op) const {
    if (!std::isfinite(beta_op)) {
      throw std::domain_error("SlidingWindowLikelihood: beta must be finite");
    }
    Evaluation out;
    std::vector<double> e(n_actions_);
    // Every normaliser lies in (0, 1], so their running product only needs
    // a log when it nears underflow.
    double log_norm = 0.0, product = 1.0, linear = 0.0;
    // The filled slots are always [0, size); order does not matter here.
    for (std::size_t slot = 0; slot < size_; ++slot) {
      const double* row = rows_.data() + slot * n_actions_;
      double pivot = beta_op * row[0];
      for (std::size_t b = 1; b < n_actions_; ++b) {
        pivot = std::max(pivot, beta_op * row[b]);
      }
      double z = 0.0, weighted = 0.0;
      for (std::size_t b = 0; b < n_actions_; ++b) {
        e[b] = rho_[b] * std::exp(beta_op * row[b] - pivot);
        z += e[b];
        weighted += e[b] * row[b];
      }
      const ActionId a = actions_[slot];
      linear += log_rho_[a] + beta_op * row[a] - pivot;
      product *= z;
      if (product < 1e-200) {
        log_norm += std::log(product);
        product = 1.0;
      }
      out.grad += row[a] - weighted / z;
    }
    log_norm += std::log(product);
    out.loss = std::max(0.0, log_norm - linear);
    return out;
  }

  // The window's contents in round form, oldest first.
  RoundStats as_stats() const {
    RoundStats stats;
    stats.n_actions = n_actions_;
    stats.rho_op = rho_;
    for (std::size_t i = 0; i < size_; ++i) {
      const std::size_t slot = (head_ + i) % capacity_;
      const auto row = rows_.begin() + slot * n_actions_;
      stats.q_op.insert(stats.q_op.end(), row, row + n_actions_);
      stats.actions.push_back(actions_[slot]);
    }
    return stats;
  }

 private:
  std::size_t capacity_;
  std::size_t n_actions_;
  std::vector<double> rho_;
  std::vector<double> log_rho_;
  std::vector<double> rows_;
  std::vector<ActionId> actions_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace softgames

#endif  // SOFTGAMES_ESTIMATOR_HPP_
