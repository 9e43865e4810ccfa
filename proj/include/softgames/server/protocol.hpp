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

#ifndef SOFTGAMES_SERVER_PROTOCOL_HPP_
#define SOFTGAMES_SERVER_PROTOCOL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "softgames/envs/pong.hpp"

namespace softgames::server {

// Every message is {"v": 1, "type": <name>, "body": {...}}. The version sits
// in the envelope so it never collides with the vertical action component.
inline constexpr int kProtocolVersion = 1;

// WebSocket close code sent on any malformed client message.
inline constexpr std::uint16_t kCloseProtocolError = 1002;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Held opponent action; components match envs::PongAction (v = +1 is +y).
struct ActionMessage {
  int h = 0;
  int v = 0;
  std::size_t index() const { return envs::encode_pong_action(h, v); }
};

struct ConfigMessage {
  double delta = 0.0;
};

struct ResetMessage {};

using ClientMessage = std::variant<ActionMessage, ConfigMessage, ResetMessage>;

struct Score {
  int player = 0;
  int opponent = 0;
  friend bool operator==(const Score&, const Score&) = default;
};

struct StateFrame {
  std::uint64_t tick = 0;
  envs::PongState state;
  double beta_op_hat = 0.0;
  double beta_pl = 0.0;
  double delta = 0.0;
  std::uint64_t episode = 0;
  Score score;
  bool terminal = false;
  std::size_t sessions = 0;  // live sessions on the server
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ProtocolError(std::string("missing field '") + key + "'");
  return *it;
}

inline void require_keys(const nlohmann::json& obj, std::size_t n) {
  if (obj.size() != n) throw ProtocolError("unexpected fields");
}

inline int component(const nlohmann::json& j, const char* key) {
  const auto& c = require(j, key);
  if (!c.is_number_integer()) throw ProtocolError(std::string(key) + " must be an integer");
  const auto x = c.get<std::int64_t>();
  if (x < -1 || x > 1) throw ProtocolError(std::string(key) + " must be -1, 0 or 1");
  return static_cast<int>(x);
}

}  // namespace detail

/// Parses one client text frame. Throws ProtocolError on anything that is not
/// exactly a valid version-1 message.
inline ClientMessage parse_client_message(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("not a JSON object");
  detail::require_keys(j, 3);
  const auto& version = detail::require(j, "v");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kProtocolVersion) {
    throw ProtocolError("unsupported protocol version");
  }
  const auto& type = detail::require(j, "type");
  const auto& body = detail::require(j, "body");
  if (!type.is_string() || !body.is_object()) throw ProtocolError("malformed envelope");
  const auto& name = type.get_ref<const std::string&>();
  if (name == "action") {
    detail::require_keys(body, 2);
    return ActionMessage{detail::component(body, "h"), detail::component(body, "v")};
  }
  if (name == "config") {
    detail::require_keys(body, 1);
    const auto& d = detail::require(body, "delta");
    if (!d.is_number() || !std::isfinite(d.get<double>())) {
      throw ProtocolError("delta must be a finite number");
    }
    return ConfigMessage{d.get<double>()};
  }
  if (name == "reset") {
    detail::require_keys(body, 0);
    return ResetMessage{};
  }
  throw ProtocolError("unknown message type '" + name + "'");
}

inline nlohmann::json envelope(std::string_view type, nlohmann::json body) {
  return {{"v", kProtocolVersion}, {"type", type}, {"body", std::move(body)}};
}

inline std::string encode(const ActionMessage& m) {
  return envelope("action", {{"h", m.h}, {"v", m.v}}).dump();
}
inline std::string encode(const ConfigMessage& m) {
  return envelope("config", {{"delta", m.delta}}).dump();
}
inline std::string encode(const ResetMessage&) {
  return envelope("reset", nlohmann::json::object()).dump();
}

inline std::string encode(const StateFrame& f) {
  return envelope("state", {{"tick", f.tick},
                            {"state", f.state.v},
                            {"beta_op_hat", f.beta_op_hat},
                            {"beta_pl", f.beta_pl},
                            {"delta", f.delta},
                            {"episode", f.episode},
                            {"score", {{"player", f.score.player},
                                       {"opponent", f.score.opponent}}},
                            {"terminal", f.terminal},
                            {"sessions", f.sessions}})
      .dump();
}

/// Client-side decoder for server frames.
inline StateFrame parse_state_frame(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("type", "") != "state" ||
      j.value("v", 0) != kProtocolVersion) {
    throw ProtocolError("not a state frame");
  }
  try {
    const auto& b = j.at("body");
    StateFrame f;
    f.tick = b.at("tick").get<std::uint64_t>();
    f.state.v = b.at("state").get<decltype(f.state.v)>();
    f.beta_op_hat = b.at("beta_op_hat").get<double>();
    f.beta_pl = b.at("beta_pl").get<double>();
    f.delta = b.at("delta").get<double>();
    f.episode = b.at("episode").get<std::uint64_t>();
    f.score = {b.at("score").at("player").get<int>(), b.at("score").at("opponent").get<int>()};
    f.terminal = b.at("terminal").get<bool>();
    f.sessions = b.at("sessions").get<std::size_t>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad state frame: ") + e.what());
  }
}

}  // namespace softgames::server

#endif  // SOFTGAMES_SERVER_PROTOCOL_HPP_
