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

// Synthetic data shared by the unit and acceptance tests.

#ifndef SOFTGAMES_TESTS_FIXTURES_HPP_
#define SOFTGAMES_TESTS_FIXTURES_HPP_

#include <cmath>
#include <vector>

#include "softgames/core/random.hpp"
#include "softgames/core/soft_ops.hpp"
#include "softgames/estimator.hpp"

namespace fixtures {

namespace sg = softgames;

inline sg::JointQ random_q(sg::Rng& rng, std::size_t n_states, std::size_t na,
                           std::size_t nb, double scale = 1.0) {
  sg::JointQ q(n_states, na, nb, 0.9);
  for (double& x : q.values()) x = sg::uniform_real(rng, -scale, scale);
  return q;
}

// m records with uniformly drawn states and opponent actions drawn from the
// closed-form opponent policy at `true_params`.
inline sg::RoundDataset sample_round(const sg::JointQ& q,
                                     const sg::RationalityParams& true_params,
                                     std::size_t m, sg::Rng& rng) {
  sg::RoundDataset data;
  for (std::size_t i = 0; i < m; ++i) {
    const auto s = sg::uniform_index(rng, q.n_states());
    const auto pi = sg::opponent_policy(q, s, true_params);
    data.records.push_back({s, 0, sg::sample_action(pi, rng)});
  }
  return data;
}

// Online estimation against a fixed opponent: `rounds` rounds of `m`
// observations each, one gradient step per round.
inline sg::EstimatorState fixed_opponent_run(std::size_t rounds, std::size_t m,
                                             double beta_star, double beta0,
                                             std::uint64_t seed,
                                             double alpha2 = 0.05) {
  sg::Rng rng(seed);
  const auto q = random_q(rng, 8, 3, 4, 1.0);
  const auto params = sg::RationalityParams::uniform(10.0, beta_star, 3, 4);
  sg::EstimatorState est;
  est.beta_op_hat = beta0;
  est.alpha2 = alpha2;
  est.retain_rounds = true;
  for (std::size_t j = 0; j < rounds; ++j) {
    sg::sgd_step(est, sample_round(q, params, m, rng), q, params);
  }
  return est;
}

inline double average_static_regret(const sg::EstimatorState& est) {
  const auto grid = sg::default_regret_grid();
  return sg::static_regret(est, grid) / static_cast<double>(est.round);
}

}  // namespace fixtures

#endif  // SOFTGAMES_TESTS_FIXTURES_HPP_
