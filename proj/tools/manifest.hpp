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


// Run manifests: the resolved configuration, git-style blob hashes of every
// input and output file, and one hash over everything that determines the
// outputs (subcommand, resolved config without the output path, input files).

#ifndef SOFTGAMES_TOOLS_MANIFEST_HPP_
#define SOFTGAMES_TOOLS_MANIFEST_HPP_

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace softgames::tools {

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` prints it.
inline std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("sha1: out of memory");
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("sha1: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string file_hash(const std::filesystem::path& path) {
  return git_blob_hash(read_file(path));
}

class Manifest {
 public:
  Manifest(std::string subcommand, nlohmann::json config)
      : subcommand_(std::move(subcommand)), config_(std::move(config)) {}

  void add_input(const std::string& name, const std::filesystem::path& path) {
    inputs_[name] = file_hash(path);
  }
  // The config file is recorded but not hashed: the resolved config is.
  void set_config_file(const std::filesystem::path& path) {
    config_file_ = {{"path", path.string()}, {"hash", file_hash(path)}};
  }
  void add_output(const std::filesystem::path& path) {
    outputs_[path.filename().string()] = file_hash(path);
  }
  void set_summary(nlohmann::json summary) { summary_ = std::move(summary); }

  /// Hash of the canonical (sorted-key) JSON of subcommand, config and inputs.
  std::string input_hash() const {
    nlohmann::json config = config_;
    config.erase("out");
    const nlohmann::json doc = {{"subcommand", subcommand_}, {"config", config},
                                {"inputs", inputs_}};
    return git_blob_hash(doc.dump());
  }

  nlohmann::json to_json() const {
    return {{"tool", "softgames"},
            {"manifest_version", 1},
            {"subcommand", subcommand_},
            {"config", config_},
            {"inputs", inputs_},
            {"config_file", config_file_},
            {"input_hash", input_hash()},
            {"outputs", outputs_},
            {"summary", summary_}};
  }

  void write(const std::filesystem::path& dir) const {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << to_json().dump(2) << '\n';
  }

 private:
  std::string subcommand_;
  nlohmann::json config_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
  nlohmann::json config_file_;
  nlohmann::json summary_ = nlohmann::json::object();
};

}  // namespace softgames::tools

#endif  // SOFTGAMES_TOOLS_MANIFEST_HPP_
