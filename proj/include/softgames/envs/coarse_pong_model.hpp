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

#ifndef SOFTGAMES_ENVS_COARSE_PONG_MODEL_HPP_
#define SOFTGAMES_ENVS_COARSE_PONG_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "softgames/core/random.hpp"
#include "softgames/core/types.hpp"
#include "softgames/envs/pong.hpp"
#include "softgames/envs/tabular.hpp"

namespace softgames::envs {

struct CoarsePongModelOptions {
  int episodes = 20000;          // exploratory episodes that collect states
  int representatives = 8;       // continuous states kept per bin
  double mean_hold_ticks = 8.0;  // exploratory actions are held this long
  std::uint64_t seed = 0;
};

/// Empirical game over coarse Pong bins. Ids 0..K-1 are bins, K is the
/// absorbing post-point state and K+1 the overflow state for unseen bins.
struct CoarsePongModel {
  GameModel model;
  std::vector<std::uint64_t> keys;

  StateId terminal_id() const { return keys.size(); }
  StateId overflow_id() const { return keys.size() + 1; }

  /// A coarse Pong environment whose ids match this model.
  CoarsePongEnv make_env(CoarsePongConfig cfg) const {
    cfg.capacity = keys.size() + 2;
    CoarsePongEnv env(cfg);
    env.interner().restore(keys);
    env.freeze(true);
    return env;
  }
};

/// Collects representative continuous states per bin from exploratory play,
/// then simulates every joint action from each of them for one decision.
/// Transition probabilities and rewards are the empirical averages.
inline CoarsePongModel build_coarse_pong_model(
    const CoarsePongConfig& cfg, const CoarsePongModelOptions& opts) {
  if (opts.episodes < 1 || opts.representatives < 1 ||
      !(opts.mean_hold_ticks >= 1.0) || cfg.ticks_per_step < 1) {
    throw std::invalid_argument("build_coarse_pong_model: bad options");
  }
  auto key_of = [&](const PongState& s) {
    return discretize_pong(cfg.compact ? compact_pong_view(s, cfg.pong) : s,
                           cfg.bins, cfg.pong);
  };

  Rng rng(opts.seed);
  std::unordered_map<std::uint64_t, StateId> ids;
  std::vector<std::uint64_t> keys;
  std::vector<std::vector<PongState>> reps;
  std::vector<std::size_t> seen;
  const double switch_prob = 1.0 / opts.mean_hold_ticks;
  auto record = [&](const PongState& s) {
    const auto key = key_of(s);
    auto [it, inserted] = ids.try_emplace(key, keys.size());
    if (inserted) {
      keys.push_back(key);
      reps.emplace_back();
      seen.push_back(0);
    }
    const StateId id = it->second;
    // Reservoir sampling keeps a uniform sample of the visits.
    const std::size_t n = seen[id]++;
    if (reps[id].size() < static_cast<std::size_t>(opts.representatives)) {
      reps[id].push_back(s);
    } else if (const auto j = uniform_index(rng, n + 1);
               j < reps[id].size()) {
      reps[id][j] = s;
    }
  };
  for (int e = 0; e < opts.episodes; ++e) {
    PongState s = pong_reset(rng(), cfg.pong);
    std::size_t a_pl = uniform_index(rng, kPongNumActions);
    std::size_t a_op = uniform_index(rng, kPongNumActions);
    for (;;) {
      record(s);
      if (uniform01(rng) < switch_prob) a_pl = uniform_index(rng, kPongNumActions);
      if (uniform01(rng) < switch_prob) a_op = uniform_index(rng, kPongNumActions);
      const auto out = pong_step(s, a_pl, a_op, cfg.pong);
      if (out.terminal) break;
      s = out.next_state;
    }
  }

  const std::size_t k = keys.size();
  CoarsePongModel result;
  result.keys = keys;
  result.model = GameModel(k + 2, kPongNumActions, kPongNumActions, cfg.gamma);
  GameModel& m = result.model;
  for (StateId s : {result.terminal_id(), result.overflow_id()}) {
    for (std::size_t a = 0; a < kPongNumActions; ++a) {
      for (std::size_t b = 0; b < kPongNumActions; ++b) {
        m.set_successors(s, a, b, {{s, 1.0}});
      }
    }
  }
  std::map<StateId, double> counts;
  for (StateId s = 0; s < k; ++s) {
    const auto& group = reps[s];
    const double w = 1.0 / static_cast<double>(group.size());
    for (std::size_t a = 0; a < kPongNumActions; ++a) {
      for (std::size_t b = 0; b < kPongNumActions; ++b) {
        counts.clear();
        double reward = 0.0;
        for (PongState x : group) {
          x[PongState::kTime] = 0.0;  // the coarse view has no clock
          StateId next = result.overflow_id();
          for (int t = 0; t < cfg.ticks_per_step; ++t) {
            const auto out = pong_step(x, a, b, cfg.pong);
            x = out.next_state;
            if (out.terminal) {
              reward += w * out.reward_pl;
              next = result.terminal_id();
              break;
            }
          }
          if (next != result.terminal_id()) {
            x[PongState::kTime] = 0.0;
            if (auto it = ids.find(key_of(x)); it != ids.end()) next = it->second;
          }
          counts[next] += w;
        }
        std::vector<GameModel::Successor> succ;
        succ.reserve(counts.size());
        for (const auto& [next, p] : counts) succ.push_back({next, p});
        m.set_successors(s, a, b, std::move(succ));
        m.set_reward(s, a, b, reward);
      }
    }
  }
  return result;
}

}  // namespace softgames::envs

#endif  // SOFTGAMES_ENVS_COARSE_PONG_MODEL_HPP_
