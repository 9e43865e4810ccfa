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

#ifndef SOFTGAMES_SERVER_POLICY_SOURCE_HPP_
#define SOFTGAMES_SERVER_POLICY_SOURCE_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "softgames/core/checkpoint.hpp"
#include "softgames/core/soft_ops.hpp"
#include "softgames/core/types.hpp"
#include "softgames/deep/network.hpp"
#include "softgames/envs/coarse_pong_model.hpp"
#include "softgames/envs/pong.hpp"
#include "softgames/envs/tabular.hpp"

namespace softgames::server {

/// Immutable source of joint soft Q-values for live Pong; shared by sessions.
class PolicySource {
 public:
  virtual ~PolicySource() = default;
  /// Row-major 9 x 9 joint Q-values (player x opponent) at a court state.
  virtual std::vector<double> joint_q(const envs::PongState& s) const = 0;
  /// The agent re-decides every this many ticks.
  virtual int ticks_per_decision() const = 0;
  virtual const envs::PongConfig& pong() const = 0;
  virtual std::string kind() const = 0;
};

/// A tabular JointQ over the compact coarse-Pong bins.
class TablePolicySource final : public PolicySource {
 public:
  TablePolicySource(JointQ q, std::vector<std::uint64_t> keys,
                    envs::CoarsePongConfig cfg)
      : q_(std::move(q)), keys_(std::move(keys)), cfg_(cfg) {
    if (q_.n_actions_pl() != envs::kPongNumActions ||
        q_.n_actions_op() != envs::kPongNumActions) {
      throw std::invalid_argument("TablePolicySource: table must be 9 x 9");
    }
    if (q_.n_states() < keys_.size() + 1) {
      throw std::invalid_argument("TablePolicySource: table smaller than key set");
    }
    for (StateId i = 0; i < keys_.size(); ++i) ids_.emplace(keys_[i], i);
  }

  std::vector<double> joint_q(const envs::PongState& s) const override {
    const auto key = envs::discretize_pong(
        cfg_.compact ? envs::compact_pong_view(s, cfg_.pong) : s, cfg_.bins, cfg_.pong);
    const auto it = ids_.find(key);
    const StateId id = it == ids_.end() ? q_.n_states() - 1 : it->second;
    const auto block = q_.state_block(id);
    return {block.begin(), block.end()};
  }
  int ticks_per_decision() const override { return cfg_.ticks_per_step; }
  const envs::PongConfig& pong() const override { return cfg_.pong; }
  std::string kind() const override { return "coarse-pong-table"; }

  const JointQ& table() const { return q_; }
  const std::vector<std::uint64_t>& keys() const { return keys_; }
  const envs::CoarsePongConfig& config() const { return cfg_; }

 private:
  JointQ q_;
  std::vector<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, StateId> ids_;
  envs::CoarsePongConfig cfg_;
};

/// The deep network on normalised Pong features.
class NetworkPolicySource final : public PolicySource {
 public:
  NetworkPolicySource(deep::QNetworkParams params, envs::PongEnvConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {
    if (params_.shape.input != envs::kPongStateDim ||
        params_.shape.n_actions_pl != envs::kPongNumActions ||
        params_.shape.n_actions_op != envs::kPongNumActions) {
      throw std::invalid_argument("NetworkPolicySource: network is not a Pong network");
    }
  }

  std::vector<double> joint_q(const envs::PongState& s) const override {
    const auto f = envs::pong_features(s, cfg_.pong);
    return deep::forward(params_, f);
  }
  int ticks_per_decision() const override { return cfg_.ticks_per_step; }
  const envs::PongConfig& pong() const override { return cfg_.pong; }
  std::string kind() const override { return "network"; }

 private:
  deep::QNetworkParams params_;
  envs::PongEnvConfig cfg_;
};

/// Builds the empirical coarse-Pong game and solves it at (beta_pl, beta_op).
inline std::shared_ptr<TablePolicySource> solve_coarse_pong_table(
    const envs::CoarsePongConfig& cfg, const envs::CoarsePongModelOptions& opts,
    double beta_pl = 50.0, double beta_op = -20.0, double tol = 1e-8) {
  auto model = envs::build_coarse_pong_model(cfg, opts);
  const auto params = RationalityParams::uniform(beta_pl, beta_op, envs::kPongNumActions,
                                                 envs::kPongNumActions);
  auto vi = solve_value_iteration(model.model, params, tol, 1000000);
  return std::make_shared<TablePolicySource>(std::move(vi.q), std::move(model.keys), cfg);
}

// Table checkpoint: one JSON file holding the bin layout, the bin keys and
// the JointQ checkpoint object.
inline void save_table_policy(const std::filesystem::path& path,
                              const TablePolicySource& src) {
  const auto& c = src.config();
  nlohmann::json j = {{"version", 1},
                      {"kind", src.kind()},
                      {"bins", c.bins},
                      {"compact", c.compact},
                      {"ticks_per_step", c.ticks_per_step},
                      {"gamma", c.gamma},
                      {"keys", src.keys()},
                      {"table", to_json(src.table())}};
  write_json_file(path, j);
}

inline std::shared_ptr<TablePolicySource> table_policy_from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != 1 || j.value("kind", "") != "coarse-pong-table") {
    throw std::invalid_argument("table policy: unsupported version or kind");
  }
  envs::CoarsePongConfig cfg;
  cfg.bins = j.at("bins").get<int>();
  cfg.compact = j.at("compact").get<bool>();
  cfg.ticks_per_step = j.at("ticks_per_step").get<int>();
  cfg.gamma = j.at("gamma").get<double>();
  return std::make_shared<TablePolicySource>(joint_q_from_json(j.at("table")),
                                             j.at("keys").get<std::vector<std::uint64_t>>(),
                                             cfg);
}

/// Loads either a table checkpoint (`*.json` with kind coarse-pong-table) or
/// a network checkpoint stem (`<stem>.json` + `<stem>.bin`).
inline std::shared_ptr<const PolicySource> load_policy_source(
    const std::filesystem::path& path) {
  auto json_path = path;
  if (json_path.extension() != ".json") json_path = std::filesystem::path(path).concat(".json");
  const auto j = read_json_file(json_path);
  if (j.value("kind", "") == "coarse-pong-table") return table_policy_from_json(j);
  if (j.value("format", "") == "f64-le") {
    deep::NetworkCheckpointInfo info;
    auto stem = json_path;
    stem.replace_extension();
    auto params = deep::load_network(stem, &info);
    envs::PongEnvConfig cfg;
    cfg.ticks_per_step = info.ticks_per_step;
    return std::make_shared<NetworkPolicySource>(std::move(params), cfg);
  }
  throw std::invalid_argument("load_policy_source: unrecognised checkpoint " +
                              json_path.string());
}

}  // namespace softgames::server

#endif  // SOFTGAMES_SERVER_POLICY_SOURCE_HPP_
