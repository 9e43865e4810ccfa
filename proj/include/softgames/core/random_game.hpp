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

#ifndef SOFTGAMES_CORE_RANDOM_GAME_HPP_
#define SOFTGAMES_CORE_RANDOM_GAME_HPP_

#include <cstdint>
#include <vector>

#include "softgames/core/random.hpp"
#include "softgames/core/types.hpp"

namespace softgames {

struct RandomGameSpec {
  std::size_t n_states = 3;
  std::size_t n_actions_pl = 2;
  std::size_t n_actions_op = 2;
  double gamma = 0.9;
  double reward_scale = 1.0;
  // Each joint action reaches at most this many successors (0 = all states).
  std::size_t max_successors = 0;
};

/// Rewards uniform in [-scale, scale]; transition rows are normalised
/// uniform weights over a random subset of successors.
inline GameModel random_game(const RandomGameSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  GameModel model(spec.n_states, spec.n_actions_pl, spec.n_actions_op,
                  spec.gamma);
  const std::size_t fan = spec.max_successors == 0
                              ? spec.n_states
                              : std::min(spec.max_successors, spec.n_states);
  for (StateId s = 0; s < spec.n_states; ++s) {
    for (ActionId a = 0; a < spec.n_actions_pl; ++a) {
      for (ActionId b = 0; b < spec.n_actions_op; ++b) {
        model.set_reward(s, a, b,
                         uniform_real(rng, -spec.reward_scale, spec.reward_scale));
        std::vector<double> weights(spec.n_states, 0.0);
        for (std::size_t k = 0; k < fan; ++k) {
          const auto next = fan == spec.n_states
                                ? k
                                : uniform_index(rng, spec.n_states);
          weights[next] += 0.05 + uniform01(rng);
        }
        double total = 0.0;
        for (double w : weights) total += w;
        for (double& w : weights) w /= total;
        model.set_transition_row(s, a, b, weights);
      }
    }
  }
  return model;
}

}  // namespace softgames

#endif  // SOFTGAMES_CORE_RANDOM_GAME_HPP_
