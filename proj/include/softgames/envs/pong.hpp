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

#ifndef SOFTGAMES_ENVS_PONG_HPP_
#define SOFTGAMES_ENVS_PONG_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>

#include "softgames/core/random.hpp"
#include "softgames/envs/step.hpp"

namespace softgames::envs {

/// Simplified two-paddle Pong on the court [-1, 1]^2. The player defends the
/// left goal line (x = -1), the opponent the right one (x = +1).
struct PongConfig {
  double paddle_speed = 0.05;  // per axis per tick
  double ball_speed = 0.03;    // per tick
  double paddle_half_length = 0.15;
  int max_ticks = 600;
  // Each paddle moves horizontally inside a band in front of its goal.
  double band_inner = 0.75;
  double band_outer = 0.95;
  double home_x = 0.85;
  double max_serve_angle = std::numbers::pi / 4.0;
};

inline constexpr std::size_t kPongStateDim = 13;
inline constexpr std::size_t kPongNumActions = 9;

/// Flat layout: player paddle (x, y, vx, vy), opponent paddle (x, y, vx, vy),
/// ball (x, y, vx, vy), normalised time.
struct PongState {
  std::array<double, kPongStateDim> v{};

  enum Field : std::size_t {
    kPlX = 0, kPlY, kPlVx, kPlVy,
    kOpX, kOpY, kOpVx, kOpVy,
    kBallX, kBallY, kBallVx, kBallVy,
    kTime
  };

  double& operator[](Field f) { return v[f]; }
  double operator[](Field f) const { return v[f]; }
  friend bool operator==(const PongState&, const PongState&) = default;
};

using PongStepOutcome = StepOutcome<PongState>;

/// Factored action: horizontal in {-1, 0, +1} (left, stay, right), vertical in
/// {+1, 0, -1} (up, stay, down). Index = 3 * h_index + v_index.
struct PongAction {
  int h = 0;
  int v = 0;
};

inline constexpr std::size_t kPongStay = 4;

inline PongAction decode_pong_action(std::size_t a) {
  if (a >= kPongNumActions) throw std::out_of_range("pong: invalid action index");
  return {static_cast<int>(a / 3) - 1, 1 - static_cast<int>(a % 3)};
}

inline std::size_t encode_pong_action(int h, int v) {
  if (h < -1 || h > 1 || v < -1 || v > 1) {
    throw std::out_of_range("pong: action components must lie in {-1, 0, 1}");
  }
  return static_cast<std::size_t>((h + 1) * 3 + (1 - v));
}

namespace detail {

inline void move_paddle(PongState& s, std::size_t x_field, PongAction a,
                        double x_lo, double x_hi, const PongConfig& cfg) {
  const double old_x = s.v[x_field];
  const double old_y = s.v[x_field + 1];
  const double y_lim = 1.0 - cfg.paddle_half_length;
  const double x = std::clamp(old_x + a.h * cfg.paddle_speed, x_lo, x_hi);
  const double y = std::clamp(old_y + a.v * cfg.paddle_speed, -y_lim, y_lim);
  s.v[x_field] = x;
  s.v[x_field + 1] = y;
  s.v[x_field + 2] = x - old_x;
  s.v[x_field + 3] = y - old_y;
}

}  // namespace detail

/// Serves from the centre towards a random side at a random angle.
inline PongState pong_reset(std::uint64_t seed, const PongConfig& cfg = {}) {
  Rng rng(seed);
  PongState s;
  s[PongState::kPlX] = -cfg.home_x;
  s[PongState::kOpX] = cfg.home_x;
  const double angle = uniform_real(rng, -cfg.max_serve_angle, cfg.max_serve_angle);
  const double side = (rng() & 1) ? 1.0 : -1.0;
  s[PongState::kBallVx] = side * cfg.ball_speed * std::cos(angle);
  s[PongState::kBallVy] = cfg.ball_speed * std::sin(angle);
  return s;
}

/// One tick: paddles move, the ball advances and reflects specularly off the
/// walls and paddle faces, and crossing a goal line scores.
inline PongStepOutcome pong_step(const PongState& state, std::size_t a_pl,
                                 std::size_t a_op, const PongConfig& cfg = {}) {
  const PongAction act_pl = decode_pong_action(a_pl);
  const PongAction act_op = decode_pong_action(a_op);
  for (double x : state.v) {
    if (!std::isfinite(x)) throw std::invalid_argument("pong: non-finite state");
  }

  PongStepOutcome out;
  PongState& s = out.next_state;
  s = state;
  detail::move_paddle(s, PongState::kPlX, act_pl, -cfg.band_outer,
                      -cfg.band_inner, cfg);
  detail::move_paddle(s, PongState::kOpX, act_op, cfg.band_inner,
                      cfg.band_outer, cfg);

  const double old_x = state[PongState::kBallX];
  const double old_y = state[PongState::kBallY];
  double x = old_x + s[PongState::kBallVx];
  double y = old_y + s[PongState::kBallVy];
  if (y > 1.0) {
    y = 2.0 - y;
    s[PongState::kBallVy] = -s[PongState::kBallVy];
  } else if (y < -1.0) {
    y = -2.0 - y;
    s[PongState::kBallVy] = -s[PongState::kBallVy];
  }

  // Paddle faces are vertical segments at the paddle's x.
  auto hits = [&](double face_x, double paddle_y) {
    const double frac = (face_x - old_x) / (x - old_x);
    const double cross_y = old_y + frac * (y - old_y);
    return std::abs(cross_y - paddle_y) <= cfg.paddle_half_length;
  };
  const double pl_face = s[PongState::kPlX];
  const double op_face = s[PongState::kOpX];
  if (s[PongState::kBallVx] < 0.0 && old_x >= pl_face && x < pl_face &&
      hits(pl_face, s[PongState::kPlY])) {
    x = 2.0 * pl_face - x;
    s[PongState::kBallVx] = -s[PongState::kBallVx];
  } else if (s[PongState::kBallVx] > 0.0 && old_x <= op_face && x > op_face &&
             hits(op_face, s[PongState::kOpY])) {
    x = 2.0 * op_face - x;
    s[PongState::kBallVx] = -s[PongState::kBallVx];
  }
  s[PongState::kBallX] = x;
  s[PongState::kBallY] = y;

  const int tick =
      static_cast<int>(std::lround(state[PongState::kTime] * cfg.max_ticks)) + 1;
  s[PongState::kTime] = std::min(1.0, static_cast<double>(tick) / cfg.max_ticks);

  if (x > 1.0) {
    out.reward_pl = 1.0;
    out.terminal = true;
    out.info = StepEvent::kScoredPl;
  } else if (x < -1.0) {
    out.reward_pl = -1.0;
    out.terminal = true;
    out.info = StepEvent::kScoredOp;
  } else if (tick >= cfg.max_ticks) {
    out.terminal = true;
    out.info = StepEvent::kTimeout;
  }
  return out;
}

/// Per-dimension [lo, hi] ranges used to bin a PongState.
inline std::array<std::array<double, 2>, kPongStateDim> pong_ranges(
    const PongConfig& cfg = {}) {
  const double p = cfg.paddle_speed;
  const double b = cfg.ball_speed;
  return {{{-1.0, 1.0}, {-1.0, 1.0}, {-p, p}, {-p, p},
           {-1.0, 1.0}, {-1.0, 1.0}, {-p, p}, {-p, p},
           {-1.0 - b, 1.0 + b}, {-1.0, 1.0}, {-b, b}, {-b, b},
           {0.0, 1.0}}};
}

inline constexpr int kMaxPongBins = 30;  // 30^13 still fits in 64 bits

/// Bins every dimension uniformly; dimension 0 is the least significant
/// digit of the base-`bins` index.
inline std::uint64_t discretize_pong(const PongState& state, int bins,
                                     const PongConfig& cfg = {}) {
  if (bins < 2 || bins > kMaxPongBins) {
    throw std::invalid_argument("discretize_pong: bins must lie in [2, 30]");
  }
  const auto ranges = pong_ranges(cfg);
  constexpr double kSlack = 1e-9;
  std::uint64_t index = 0;
  std::uint64_t scale = 1;
  for (std::size_t d = 0; d < kPongStateDim; ++d) {
    const auto [lo, hi] = ranges[d];
    const double x = state.v[d];
    if (!(x >= lo - kSlack && x <= hi + kSlack)) {
      throw std::out_of_range("discretize_pong: state outside the court ranges");
    }
    const double u = (x - lo) / (hi - lo) * bins;
    const auto bin = static_cast<std::uint64_t>(
        std::clamp(static_cast<int>(std::floor(u)), 0, bins - 1));
    index += bin * scale;
    scale *= static_cast<std::uint64_t>(bins);
  }
  return index;
}

/// The state at the centre of every bin of `index`.
inline PongState pong_bin_centre(std::uint64_t index, int bins,
                                 const PongConfig& cfg = {}) {
  if (bins < 2 || bins > kMaxPongBins) {
    throw std::invalid_argument("pong_bin_centre: bins must lie in [2, 30]");
  }
  const auto ranges = pong_ranges(cfg);
  PongState s;
  for (std::size_t d = 0; d < kPongStateDim; ++d) {
    const auto bin = index % static_cast<std::uint64_t>(bins);
    index /= static_cast<std::uint64_t>(bins);
    const auto [lo, hi] = ranges[d];
    s.v[d] = lo + (static_cast<double>(bin) + 0.5) * (hi - lo) / bins;
  }
  if (index != 0) throw std::out_of_range("pong_bin_centre: index too large");
  return s;
}

/// Each coordinate mapped affinely from its pong_ranges interval to [-1, 1].
inline std::array<double, kPongStateDim> pong_features(
    const PongState& state, const PongConfig& cfg = {}) {
  const auto ranges = pong_ranges(cfg);
  std::array<double, kPongStateDim> f{};
  for (std::size_t d = 0; d < kPongStateDim; ++d) {
    const auto [lo, hi] = ranges[d];
    f[d] = 2.0 * (state.v[d] - lo) / (hi - lo) - 1.0;
  }
  return f;
}

struct PongEnvConfig {
  PongConfig pong;
  int ticks_per_step = 1;
};

/// Pong with real-vector observations, for function approximation.
class PongEnv {
 public:
  using Observation = std::array<double, kPongStateDim>;
  struct Step {
    Observation next;
    double reward = 0.0;
    bool terminal = false;
    bool absorbing = false;
  };

  explicit PongEnv(PongEnvConfig cfg = {}) : cfg_(cfg) {
    if (cfg.ticks_per_step < 1) {
      throw std::invalid_argument("PongEnv: ticks_per_step must be >= 1");
    }
  }

  std::size_t n_actions_pl() const { return kPongNumActions; }
  std::size_t n_actions_op() const { return kPongNumActions; }
  const PongState& state() const { return state_; }

  Observation reset(Rng& rng) {
    state_ = pong_reset(rng(), cfg_.pong);
    return pong_features(state_, cfg_.pong);
  }

  Step step(std::size_t a_pl, std::size_t a_op) {
    Step out;
    for (int t = 0; t < cfg_.ticks_per_step; ++t) {
      const auto tick = pong_step(state_, a_pl, a_op, cfg_.pong);
      state_ = tick.next_state;
      out.reward += tick.reward_pl;
      if (tick.terminal) {
        out.terminal = true;
        out.absorbing = tick.absorbing();
        break;
      }
    }
    out.next = pong_features(state_, cfg_.pong);
    return out;
  }

 private:
  PongEnvConfig cfg_;
  PongState state_;
};

}  // namespace softgames::envs

#endif  // SOFTGAMES_ENVS_PONG_HPP_
