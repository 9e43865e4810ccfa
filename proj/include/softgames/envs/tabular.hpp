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

#ifndef SOFTGAMES_ENVS_TABULAR_HPP_
#define SOFTGAMES_ENVS_TABULAR_HPP_

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "softgames/core/random.hpp"
#include "softgames/core/types.hpp"
#include "softgames/envs/gridworld.hpp"
#include "softgames/envs/pong.hpp"

namespace softgames::envs {

struct TabularStep {
  StateId next = 0;
  double reward = 0.0;
  bool terminal = false;   // episode over (event or step cap)
  bool absorbing = false;  // no bootstrap from `next`
};

/// A simultaneous-move environment exposing integer state ids.
template <typename E>
concept TabularEnvironment = requires(E env, const E cenv, Rng& rng,
                                      std::size_t a) {
  { cenv.n_states() } -> std::convertible_to<std::size_t>;
  { cenv.n_actions_pl() } -> std::convertible_to<std::size_t>;
  { cenv.n_actions_op() } -> std::convertible_to<std::size_t>;
  { cenv.gamma() } -> std::convertible_to<double>;
  { env.reset(rng) } -> std::convertible_to<StateId>;
  { env.step(a, a) } -> std::same_as<TabularStep>;
};

class GridWorldEnv {
 public:
  explicit GridWorldEnv(GridWorldConfig cfg = {}) : cfg_(cfg) {}

  std::size_t n_states() const { return kGridNumStates; }
  std::size_t n_actions_pl() const { return GridWorldConfig::kNumActions; }
  std::size_t n_actions_op() const { return GridWorldConfig::kNumActions; }
  double gamma() const { return cfg_.gamma; }
  const GridWorldConfig& config() const { return cfg_; }
  const GridWorldState& state() const { return state_; }

  StateId reset(Rng&) {
    state_ = gridworld_reset(cfg_);
    return gridworld_index(state_);
  }

  TabularStep step(std::size_t a_pl, std::size_t a_op) {
    const auto out = gridworld_step(state_, a_pl, a_op, cfg_);
    state_ = out.next_state;
    return {gridworld_index(state_), out.reward_pl, out.terminal,
            out.absorbing()};
  }

 private:
  GridWorldConfig cfg_;
  GridWorldState state_ = gridworld_reset();
};

/// Dense ids for the coarse Pong bins actually visited. Once `capacity` - 1
/// distinct bins are known, further bins share the last id.
class StateInterner {
 public:
  explicit StateInterner(std::size_t capacity) : capacity_(capacity) {
    if (capacity < 2) throw std::invalid_argument("StateInterner: capacity < 2");
  }

  std::size_t capacity() const { return capacity_; }
  StateId overflow_id() const { return capacity_ - 1; }
  std::size_t overflow_hits() const { return overflow_hits_; }
  const std::vector<std::uint64_t>& keys() const { return keys_; }

  StateId intern(std::uint64_t key) {
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
    if (keys_.size() + 1 >= capacity_) {
      ++overflow_hits_;
      return overflow_id();
    }
    const StateId id = keys_.size();
    ids_.emplace(key, id);
    keys_.push_back(key);
    return id;
  }

  // Lookup without inserting; unknown keys map to the overflow id.
  StateId find(std::uint64_t key) const {
    auto it = ids_.find(key);
    return it == ids_.end() ? overflow_id() : it->second;
  }

  void restore(const std::vector<std::uint64_t>& keys) {
    if (keys.size() + 1 > capacity_) {
      throw std::invalid_argument("StateInterner: too many keys for capacity");
    }
    ids_.clear();
    keys_ = keys;
    for (StateId i = 0; i < keys_.size(); ++i) ids_.emplace(keys_[i], i);
  }

 private:
  std::size_t capacity_;
  std::size_t overflow_hits_ = 0;
  std::unordered_map<std::uint64_t, StateId> ids_;
  std::vector<std::uint64_t> keys_;
};

struct CoarsePongConfig {
  PongConfig pong;
  int bins = 6;
  double gamma = 0.7;  // per decision
  std::size_t capacity = 100000;
  // Key only on the ball and the paddle heights; paddle x, paddle velocities
  // and time are pinned before binning.
  bool compact = true;
  // Each decision is held for this many ticks so a move can change the bin.
  int ticks_per_step = 5;
};

/// The state seen by the compact coarse view.
inline PongState compact_pong_view(const PongState& s, const PongConfig& cfg) {
  PongState v = s;
  v[PongState::kPlX] = -cfg.home_x;
  v[PongState::kOpX] = cfg.home_x;
  v[PongState::kPlVx] = v[PongState::kPlVy] = 0.0;
  v[PongState::kOpVx] = v[PongState::kOpVy] = 0.0;
  v[PongState::kTime] = 0.0;
  return v;
}

/// Pong seen through discretize_pong, for tabular learning and estimation.
class CoarsePongEnv {
 public:
  explicit CoarsePongEnv(CoarsePongConfig cfg = {})
      : cfg_(cfg), interner_(cfg.capacity) {
    if (cfg.ticks_per_step < 1) {
      throw std::invalid_argument("CoarsePongEnv: ticks_per_step must be >= 1");
    }
  }

  std::size_t n_states() const { return cfg_.capacity; }
  std::size_t n_actions_pl() const { return kPongNumActions; }
  std::size_t n_actions_op() const { return kPongNumActions; }
  double gamma() const { return cfg_.gamma; }
  const CoarsePongConfig& config() const { return cfg_; }
  const PongState& state() const { return state_; }
  StateInterner& interner() { return interner_; }
  const StateInterner& interner() const { return interner_; }

  // When frozen, unseen bins map to the overflow id instead of growing.
  void freeze(bool frozen) { frozen_ = frozen; }

  StateId reset(Rng& rng) {
    state_ = pong_reset(rng(), cfg_.pong);
    return id_of(state_);
  }

  TabularStep step(std::size_t a_pl, std::size_t a_op) {
    double reward = 0.0;
    for (int t = 0; t < cfg_.ticks_per_step; ++t) {
      const auto out = pong_step(state_, a_pl, a_op, cfg_.pong);
      state_ = out.next_state;
      reward += out.reward_pl;
      if (out.terminal) {
        return {id_of(state_), reward, true, out.absorbing()};
      }
    }
    return {id_of(state_), reward, false, false};
  }

  StateId id_of(const PongState& s) {
    const auto key = discretize_pong(
        cfg_.compact ? compact_pong_view(s, cfg_.pong) : s, cfg_.bins, cfg_.pong);
    return frozen_ ? interner_.find(key) : interner_.intern(key);
  }

 private:
  CoarsePongConfig cfg_;
  StateInterner interner_;
  PongState state_;
  bool frozen_ = false;
};

/// Samples episodes from an explicit GameModel.
class ModelEnv {
 public:
  ModelEnv(const GameModel& model, int max_steps, StateId start = 0)
      : model_(&model), max_steps_(max_steps), start_(start) {}

  std::size_t n_states() const { return model_->n_states(); }
  std::size_t n_actions_pl() const { return model_->n_actions_pl(); }
  std::size_t n_actions_op() const { return model_->n_actions_op(); }
  double gamma() const { return model_->gamma(); }

  // Restart from a uniformly random state instead of `start`.
  void set_random_starts(bool on) { random_starts_ = on; }

  StateId reset(Rng& rng) {
    rng_ = &rng;
    steps_ = 0;
    state_ = random_starts_ ? uniform_index(rng, n_states()) : start_;
    return state_;
  }

  TabularStep step(std::size_t a_pl, std::size_t a_op) {
    if (rng_ == nullptr) throw std::logic_error("ModelEnv: step before reset");
    const auto next = model_->successors(state_, a_pl, a_op);
    const double u = uniform01(*rng_);
    double acc = 0.0;
    StateId chosen = next.back().next;
    for (const auto& [id, prob] : next) {
      acc += prob;
      if (u < acc) {
        chosen = id;
        break;
      }
    }
    const double r = model_->reward(state_, a_pl, a_op);
    state_ = chosen;
    ++steps_;
    return {chosen, r, steps_ >= max_steps_, false};
  }

 private:
  const GameModel* model_;
  int max_steps_;
  StateId start_;
  StateId state_ = 0;
  int steps_ = 0;
  bool random_starts_ = false;
  Rng* rng_ = nullptr;
};

}  // namespace softgames::envs

#endif  // SOFTGAMES_ENVS_TABULAR_HPP_
