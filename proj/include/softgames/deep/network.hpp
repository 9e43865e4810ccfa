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

#ifndef SOFTGAMES_DEEP_NETWORK_HPP_
#define SOFTGAMES_DEEP_NETWORK_HPP_

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "softgames/core/random.hpp"
#include "softgames/core/types.hpp"

namespace softgames::deep {

struct NetworkShape {
  std::size_t input = 13;
  std::size_t hidden1 = 100;
  std::size_t hidden2 = 100;
  std::size_t n_actions_pl = 9;
  std::size_t n_actions_op = 9;

  std::size_t output() const { return n_actions_pl * n_actions_op; }
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// input -> ReLU(hidden1) -> ReLU(hidden2) -> n_pl * n_op joint soft Q-values.
/// Output unit a_pl * n_op + a_op holds Q(s, a_pl, a_op).
struct QNetworkParams {
  static constexpr std::size_t kLayers = 3;

  NetworkShape shape;
  std::array<Eigen::MatrixXd, kLayers> w;  // w[l] is out x in
  std::array<Eigen::VectorXd, kLayers> b;

  static QNetworkParams zeros(const NetworkShape& shape) {
    QNetworkParams p;
    p.shape = shape;
    const std::array<std::size_t, kLayers + 1> dims = {
        shape.input, shape.hidden1, shape.hidden2, shape.output()};
    for (std::size_t l = 0; l < kLayers; ++l) {
      const auto rows = static_cast<Eigen::Index>(dims[l + 1]);
      const auto cols = static_cast<Eigen::Index>(dims[l]);
      p.w[l] = Eigen::MatrixXd::Zero(rows, cols);
      p.b[l] = Eigen::VectorXd::Zero(rows);
    }
    return p;
  }

  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  static QNetworkParams init(const NetworkShape& shape, std::uint64_t seed) {
    QNetworkParams p = zeros(shape);
    Rng rng(seed);
    for (std::size_t l = 0; l < kLayers; ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(p.w[l].cols()));
      for (Eigen::Index i = 0; i < p.w[l].size(); ++i) {
        p.w[l].data()[i] = uniform_real(rng, -bound, bound);
      }
    }
    return p;
  }

  std::size_t n_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < kLayers; ++l) {
      n += static_cast<std::size_t>(w[l].size() + b[l].size());
    }
    return n;
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < kLayers; ++l) {
      if (!w[l].allFinite() || !b[l].allFinite()) return false;
    }
    return true;
  }

  // Every scalar in a fixed order: w0, b0, w1, b1, w2, b2 (column-major).
  template <typename F>
  void for_each(F&& f) {
    for (std::size_t l = 0; l < kLayers; ++l) {
      for (Eigen::Index i = 0; i < w[l].size(); ++i) f(w[l].data()[i]);
      for (Eigen::Index i = 0; i < b[l].size(); ++i) f(b[l].data()[i]);
    }
  }

  friend bool operator==(const QNetworkParams& x, const QNetworkParams& y) {
    if (!(x.shape == y.shape)) return false;
    for (std::size_t l = 0; l < kLayers; ++l) {
      if (x.w[l] != y.w[l] || x.b[l] != y.b[l]) return false;
    }
    return true;
  }
};

/// Gradients share the parameter layout.
using QNetworkGrads = QNetworkParams;

/// Activations kept for backpropagation; columns are batch items.
struct ForwardCache {
  Eigen::MatrixXd x, h1, h2, out;
};

inline ForwardCache forward_batch(const QNetworkParams& p,
                                  const Eigen::MatrixXd& x) {
  if (x.rows() != static_cast<Eigen::Index>(p.shape.input)) {
    throw std::invalid_argument("forward: input has the wrong dimension");
  }
  if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
  ForwardCache c;
  c.x = x;
  c.h1 = ((p.w[0] * x).colwise() + p.b[0]).cwiseMax(0.0);
  c.h2 = ((p.w[1] * c.h1).colwise() + p.b[1]).cwiseMax(0.0);
  c.out = (p.w[2] * c.h2).colwise() + p.b[2];
  return c;
}

/// Row-major n_pl x n_op joint Q-values for one state.
inline std::vector<double> forward(const QNetworkParams& p,
                                   std::span<const double> state) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(state.size()), 1);
  for (std::size_t i = 0; i < state.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = state[i];
  const auto c = forward_batch(p, x);
  return {c.out.data(), c.out.data() + c.out.size()};
}

/// Backpropagates d(loss)/d(out) through the cached activations.
inline QNetworkGrads backward(const QNetworkParams& p, const ForwardCache& c,
                              const Eigen::MatrixXd& d_out) {
  QNetworkGrads g;
  g.shape = p.shape;
  g.w[2] = d_out * c.h2.transpose();
  g.b[2] = d_out.rowwise().sum();
  const Eigen::MatrixXd d_h2 =
      (p.w[2].transpose() * d_out).cwiseProduct((c.h2.array() > 0.0).cast<double>().matrix());
  g.w[1] = d_h2 * c.h1.transpose();
  g.b[1] = d_h2.rowwise().sum();
  const Eigen::MatrixXd d_h1 =
      (p.w[1].transpose() * d_h2).cwiseProduct((c.h1.array() > 0.0).cast<double>().matrix());
  g.w[0] = d_h1 * c.x.transpose();
  g.b[0] = d_h1.rowwise().sum();
  return g;
}

/// Adaptive-moment optimiser with bias correction.
class Adam {
 public:
  explicit Adam(const QNetworkParams& like, double lr = 1e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(QNetworkParams::zeros(like.shape)), v_(m_) {
    if (!(lr > 0.0)) throw std::invalid_argument("Adam: lr must be positive");
  }

  void step(QNetworkParams& p, const QNetworkGrads& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = beta1_ * m + (1.0 - beta1_) * grad;
      v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
      param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    };
    for (std::size_t l = 0; l < QNetworkParams::kLayers; ++l) {
      update(p.w[l], g.w[l], m_.w[l], v_.w[l]);
      update(p.b[l], g.b[l], m_.b[l], v_.b[l]);
    }
  }

  std::uint64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  QNetworkParams m_, v_;
  std::uint64_t t_ = 0;
};

// Checkpoint: `<stem>.json` manifest plus `<stem>.bin` holding every layer
// as little-endian 64-bit floats in for_each order.

struct NetworkCheckpointInfo {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  int ticks_per_step = 1;  // decision length the network was trained with
};

namespace detail {

inline void write_le_double(std::ostream& out, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(bytes, 8);
}

inline double read_le_double(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw std::runtime_error("network checkpoint: truncated binary file");
  }
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline void save_network(const std::filesystem::path& stem,
                         const QNetworkParams& params,
                         const NetworkCheckpointInfo& info = {}) {
  auto p = params;
  const auto bin_path = std::filesystem::path(stem).concat(".bin");
  {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw std::runtime_error("save_network: cannot open " + bin_path.string());
    p.for_each([&](double& x) { detail::write_le_double(out, x); });
    if (!out) throw std::runtime_error("save_network: write failed");
  }
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < QNetworkParams::kLayers; ++l) {
    layers.push_back({{"weight", {params.w[l].rows(), params.w[l].cols()}},
                      {"bias", {params.b[l].size()}}});
  }
  const nlohmann::json manifest = {
      {"version", 1},
      {"format", "f64-le"},
      {"activation", "relu"},
      {"n_actions", {params.shape.n_actions_pl, params.shape.n_actions_op}},
      {"layers", layers},
      {"seed", info.seed},
      {"step", info.step},
      {"ticks_per_step", info.ticks_per_step},
      {"weights_file", bin_path.filename().string()}};
  const auto json_path = std::filesystem::path(stem).concat(".json");
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("save_network: cannot open " + json_path.string());
  out << manifest.dump(2) << '\n';
}

inline QNetworkParams load_network(const std::filesystem::path& stem,
                                   NetworkCheckpointInfo* info = nullptr) {
  const auto json_path = std::filesystem::path(stem).concat(".json");
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("load_network: cannot open " + json_path.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("load_network: bad manifest: ") + e.what());
  }
  if (m.value("version", 0) != 1 || m.value("format", "") != "f64-le") {
    throw std::runtime_error("load_network: unsupported manifest version or format");
  }
  const auto& layers = m.at("layers");
  if (layers.size() != QNetworkParams::kLayers) {
    throw std::runtime_error("load_network: expected three layers");
  }
  NetworkShape shape;
  shape.input = layers[0].at("weight")[1].get<std::size_t>();
  shape.hidden1 = layers[0].at("weight")[0].get<std::size_t>();
  shape.hidden2 = layers[1].at("weight")[0].get<std::size_t>();
  shape.n_actions_pl = m.at("n_actions")[0].get<std::size_t>();
  shape.n_actions_op = m.at("n_actions")[1].get<std::size_t>();
  QNetworkParams p = QNetworkParams::zeros(shape);
  for (std::size_t l = 0; l < QNetworkParams::kLayers; ++l) {
    const auto& layer = layers[l];
    if (layer.at("weight")[0].get<Eigen::Index>() != p.w[l].rows() ||
        layer.at("weight")[1].get<Eigen::Index>() != p.w[l].cols() ||
        layer.at("bias")[0].get<Eigen::Index>() != p.b[l].size()) {
      throw std::runtime_error("load_network: inconsistent layer shapes");
    }
  }
  const auto bin_path = json_path.parent_path() / m.at("weights_file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("load_network: cannot open " + bin_path.string());
  p.for_each([&](double& x) { x = detail::read_le_double(bin); });
  if (bin.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("load_network: trailing bytes in binary file");
  }
  if (!p.all_finite()) throw std::runtime_error("load_network: non-finite weights");
  if (info != nullptr) {
    info->seed = m.value("seed", std::uint64_t{0});
    info->step = m.value("step", std::uint64_t{0});
    info->ticks_per_step = m.value("ticks_per_step", 1);
  }
  return p;
}

}  // namespace softgames::deep

#endif  // SOFTGAMES_DEEP_NETWORK_HPP_
