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

#ifndef SOFTGAMES_CORE_RANDOM_HPP_
#define SOFTGAMES_CORE_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace softgames {

// mt19937_64 output is fully specified by the standard, so seeded runs are
// reproducible across toolchains as long as we avoid std distributions.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n) by rejection (no modulo bias).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

/// Draws an index distributed according to `row`.
inline std::size_t sample_action(std::span<const double> row, Rng& rng) {
  if (row.empty()) throw std::invalid_argument("sample_action: empty row");
  double total = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("sample_action: degenerate probability row");
    }
    total += p;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("sample_action: row has no mass");
  }
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] > 0.0) last_positive = i;
    acc += row[i];
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace softgames

#endif  // SOFTGAMES_CORE_RANDOM_HPP_
