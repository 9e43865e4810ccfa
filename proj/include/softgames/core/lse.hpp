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

#ifndef SOFTGAMES_CORE_LSE_HPP_
#define SOFTGAMES_CORE_LSE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace softgames {

// Inverse temperatures are plain doubles; +/-infinity are the perfectly
// rational (max) and perfectly adversarial (min) limits.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Below this magnitude the log-sum-exp switches to its exact beta -> 0 limit.
inline constexpr double kBetaZeroThreshold = 1e-8;

inline constexpr double kWeightSumTolerance = 1e-12;

inline bool is_zero_beta(double beta) {
  return std::abs(beta) < kBetaZeroThreshold;
}

namespace detail {

// No validation. `values` and `weights` have equal, non-zero length.
inline double lse_beta_unchecked(std::span<const double> values,
                                 std::span<const double> weights,
                                 double beta) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (beta == kInfinity) return hi;
  if (beta == -kInfinity) return lo;
  if (lo == hi) return lo;
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;
  if (is_zero_beta(beta)) {
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) mean += weights[i] * values[i];
    return std::clamp(mean / weight_sum, lo, hi);
  }
  // Shift by the element with the largest exponent; expm1/log1p keep the
  // small-beta regime free of cancellation.
  const double pivot = beta > 0.0 ? hi : lo;
  double excess = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    excess += weights[i] * std::expm1(beta * (values[i] - pivot));
  }
  return std::clamp(pivot + std::log1p(excess / weight_sum) / beta, lo, hi);
}

}  // namespace detail

inline void validate_distribution(std::span<const double> weights,
                                  const char* what) {
  if (weights.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty distribution");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(std::string(what) +
                                  ": weights must be finite and positive");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument(std::string(what) + ": weights must sum to 1");
  }
}

/// Weighted, temperature-signed log-sum-exp
///
///   (1/beta) * log(sum_i w_i * exp(beta * v_i))
///
/// stabilised by max-subtraction. beta = +inf gives max(v), beta = -inf gives
/// min(v) and |beta| < kBetaZeroThreshold gives the weighted mean. The result
/// always lies in [min(v), max(v)].
inline double lse_beta(std::span<const double> values,
                       std::span<const double> weights, double beta) {
  if (values.size() != weights.size()) {
    throw std::invalid_argument("lse_beta: values and weights differ in length");
  }
  if (std::isnan(beta)) throw std::invalid_argument("lse_beta: beta is NaN");
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("lse_beta: values must be finite");
    }
  }
  validate_distribution(weights, "lse_beta");
  return detail::lse_beta_unchecked(values, weights, beta);
}

/// Normalised rho_i * exp(beta * v_i). Infinite beta splits the mass over the
/// argmax (or argmin) set in proportion to the reference weights.
inline std::vector<double> softmax_beta(std::span<const double> values,
                                        std::span<const double> weights,
                                        double beta) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  if (std::isinf(beta)) {
    const double target = beta > 0.0
                              ? *std::max_element(values.begin(), values.end())
                              : *std::min_element(values.begin(), values.end());
    double mass = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] == target) {
        out[i] = weights[i];
        mass += weights[i];
      }
    }
    for (double& p : out) p /= mass;
    return out;
  }
  double pivot = beta * values[0];
  for (double v : values) pivot = std::max(pivot, beta * v);
  double z = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = weights[i] * std::exp(beta * values[i] - pivot);
    z += out[i];
  }
  for (double& p : out) p /= z;
  return out;
}

inline std::vector<double> uniform_distribution(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace softgames

#endif  // SOFTGAMES_CORE_LSE_HPP_
