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


// CLI11 config formatter backed by toml++. Top-level keys feed global
// options; a [name] table feeds the subcommand `name`. A run manifest
// (JSON with a "config" object of the same shape) is accepted too, which is
// how a recorded run is replayed.

#ifndef SOFTGAMES_TOOLS_TOML_CONFIG_HPP_
#define SOFTGAMES_TOOLS_TOML_CONFIG_HPP_

#include <charconv>
#include <istream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "toml.hpp"

namespace softgames::tools {

namespace detail {

// Config keys may use '_' or '-'; options are registered with '-'.
inline std::string option_key(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string toml_scalar(const toml::node& node, const std::string& where) {
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return std::to_string(i->get());
  if (const auto* f = node.as_floating_point()) return format_double(f->get());
  if (const auto* b = node.as_boolean()) return b->get() ? "true" : "false";
  throw CLI::ConfigError("config: unsupported value type for '" + where + "'");
}

inline std::vector<std::string> toml_inputs(const toml::node& node, const std::string& where) {
  std::vector<std::string> out;
  if (const auto* arr = node.as_array()) {
    for (const auto& el : *arr) out.push_back(toml_scalar(el, where));
  } else {
    out.push_back(toml_scalar(node, where));
  }
  return out;
}

inline std::string json_scalar(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_integer()) return j.dump();
  if (j.is_number()) return format_double(j.get<double>());
  throw CLI::ConfigError("config: unsupported value type for '" + where + "'");
}

inline void json_items(const nlohmann::json& obj, std::vector<std::string> parents,
                       std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object()) {
      if (!parents.empty()) throw CLI::ConfigError("config: tables nest one level only");
      json_items(value, {key}, out);
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = option_key(key);
    if (value.is_array()) {
      for (const auto& el : value) item.inputs.push_back(json_scalar(el, key));
    } else {
      item.inputs.push_back(json_scalar(value, key));
    }
    out.push_back(std::move(item));
  }
}

}  // namespace detail

class TomlConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    const std::string text((std::istreambuf_iterator<char>(input)),
                           std::istreambuf_iterator<char>());
    std::vector<CLI::ConfigItem> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      const auto j = nlohmann::json::parse(text, nullptr, false);
      if (j.is_discarded() || !j.contains("config") || !j.at("config").is_object()) {
        throw CLI::ConfigError("config: JSON input must be a run manifest");
      }
      detail::json_items(j.at("config"), {}, out);
      return out;
    }
    toml::table root;
    try {
      root = toml::parse(text);
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "config: " << e.description() << " at line " << e.source().begin.line;
      throw CLI::ConfigError(msg.str());
    }
    for (const auto& [key, node] : root) {
      const std::string name(key.str());
      if (const auto* table = node.as_table()) {
        for (const auto& [sub_key, sub_node] : *table) {
          const std::string sub_name(sub_key.str());
          if (sub_node.is_table()) throw CLI::ConfigError("config: tables nest one level only");
          out.push_back({{name}, detail::option_key(sub_name),
                         detail::toml_inputs(sub_node, name + "." + sub_name)});
        }
      } else {
        out.push_back({{}, detail::option_key(name), detail::toml_inputs(node, name)});
      }
    }
    return out;
  }
};

}  // namespace softgames::tools

#endif  // SOFTGAMES_TOOLS_TOML_CONFIG_HPP_
