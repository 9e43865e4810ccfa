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

#ifndef SOFTGAMES_CORE_CHECKPOINT_HPP_
#define SOFTGAMES_CORE_CHECKPOINT_HPP_

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "softgames/core/types.hpp"

namespace softgames {

inline constexpr int kCheckpointVersion = 1;

// nlohmann/json prints doubles with the shortest decimal form that parses
// back to the same bits, so every value round-trips exactly.
inline nlohmann::json to_json(const JointQ& q) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["shape"] = {q.n_states(), q.n_actions_pl(), q.n_actions_op()};
  j["gamma"] = q.gamma();
  j["q"] = std::vector<double>(q.values().begin(), q.values().end());
  return j;
}

inline void check_version(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kCheckpointVersion) {
    throw std::invalid_argument("checkpoint: unsupported or missing version");
  }
}

inline JointQ joint_q_from_json(const nlohmann::json& j) {
  check_version(j);
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 3) throw std::invalid_argument("checkpoint: bad shape");
  JointQ q(shape[0], shape[1], shape[2], j.at("gamma").get<double>());
  const auto& flat = j.at("q");
  if (flat.size() != q.values().size()) {
    throw std::invalid_argument("checkpoint: q length does not match shape");
  }
  for (std::size_t i = 0; i < flat.size(); ++i) {
    q.values()[i] = flat[i].get<double>();
  }
  return q;
}

/// Model layout: shape and gamma as for JointQ, a flat row-major "reward"
/// array and one [[next, prob], ...] list per joint action in "transitions".
inline nlohmann::json to_json(const GameModel& model) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["shape"] = {model.n_states(), model.n_actions_pl(), model.n_actions_op()};
  j["gamma"] = model.gamma();
  std::vector<double> reward;
  nlohmann::json transitions = nlohmann::json::array();
  for (StateId s = 0; s < model.n_states(); ++s) {
    for (ActionId a = 0; a < model.n_actions_pl(); ++a) {
      for (ActionId b = 0; b < model.n_actions_op(); ++b) {
        reward.push_back(model.reward(s, a, b));
        nlohmann::json row = nlohmann::json::array();
        for (const auto& [next, prob] : model.successors(s, a, b)) {
          row.push_back({next, prob});
        }
        transitions.push_back(std::move(row));
      }
    }
  }
  j["reward"] = std::move(reward);
  j["transitions"] = std::move(transitions);
  return j;
}

inline GameModel game_model_from_json(const nlohmann::json& j) {
  check_version(j);
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 3) throw std::invalid_argument("checkpoint: bad shape");
  GameModel model(shape[0], shape[1], shape[2], j.at("gamma").get<double>());
  const auto& reward = j.at("reward");
  const auto& transitions = j.at("transitions");
  const std::size_t n = shape[0] * shape[1] * shape[2];
  if (reward.size() != n || transitions.size() != n) {
    throw std::invalid_argument("checkpoint: model arrays do not match shape");
  }
  std::size_t i = 0;
  for (StateId s = 0; s < shape[0]; ++s) {
    for (ActionId a = 0; a < shape[1]; ++a) {
      for (ActionId b = 0; b < shape[2]; ++b, ++i) {
        model.set_reward(s, a, b, reward[i].get<double>());
        std::vector<GameModel::Successor> next;
        for (const auto& pair : transitions[i]) {
          next.push_back({pair.at(0).get<StateId>(), pair.at(1).get<double>()});
        }
        model.set_successors(s, a, b, std::move(next));
      }
    }
  }
  model.validate();
  return model;
}

inline void write_json_file(const std::filesystem::path& path,
                            const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump() << '\n';
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace softgames

#endif  // SOFTGAMES_CORE_CHECKPOINT_HPP_
