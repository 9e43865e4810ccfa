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


// End-to-end tests of the softgames binary.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "json.hpp"

#ifndef SOFTGAMES_CLI_PATH
#error "SOFTGAMES_CLI_PATH must point at the softgames binary"
#endif

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("softgames_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the binary inside the test directory; returns its exit code.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" +
                            SOFTGAMES_CLI_PATH + "' " + args + " >stdout.txt 2>stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    EXPECT_TRUE(in) << rel;
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  nlohmann::json manifest(const std::string& out) const {
    return nlohmann::json::parse(read(out + "/manifest.json"));
  }
  void write(const std::string& rel, const std::string& text) const {
    std::ofstream(dir_ / rel) << text;
  }
  std::size_t lines(const std::string& rel) const {
    const auto text = read(rel);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  }

  fs::path dir_;
};

constexpr const char* kShortTrain = "train --env gridworld --beta-pl 20 --beta-op 5 --episodes 200";

TEST_F(Cli, HelpDocumentsCsvColumns) {
  const std::pair<const char*, const char*> expected[] = {
      {"solve", "state,a_pl,a_op,q"},
      {"train", "episode,mean_reward,bellman_error,beta_op_hat,beta_pl"},
      {"estimate", "transition,beta_op_hat,loss,grad"},
      {"balance", "episode,beta_op_hat,beta_pl,delta,avg_reward"},
      {"deep-train", "episode,step,reward,mean_loss"},
      {"sweep", "beta_pl,beta_op,mean_reward,bellman_error,episodes_run,status"},
      {"serve", "/healthz"},
  };
  for (const auto& [sub, columns] : expected) {
    ASSERT_EQ(run(std::string(sub) + " --help"), 0) << sub;
    EXPECT_NE(read("stdout.txt").find(columns), std::string::npos) << sub;
  }
  ASSERT_EQ(run("--help"), 0);
  EXPECT_NE(read("stdout.txt").find("SOFTGAMES_SEED"), std::string::npos);
}

TEST_F(Cli, SolveWritesValueQAndPolicyTables) {
  ASSERT_EQ(run("solve --env gridworld --beta-pl 20 --beta-op -20 --tol 1e-8 --out s"), 0);
  EXPECT_EQ(lines("s/value.csv"), 1u + 901u);
  EXPECT_EQ(lines("s/q.csv"), 1u + 901u * 25u);
  EXPECT_EQ(lines("s/policy.csv"), 1u + 2u * 901u * 5u);
  const auto m = manifest("s");
  EXPECT_EQ(m.at("subcommand"), "solve");
  EXPECT_EQ(m.at("config").at("solve").at("beta-pl"), 20.0);
  EXPECT_LT(m.at("summary").at("last_delta").get<double>(), 1e-8);
  for (const char* f : {"value.csv", "q.csv", "policy.csv", "q.json"}) {
    EXPECT_TRUE(m.at("outputs").contains(f)) << f;
  }
}

TEST_F(Cli, SolvePongWritesAServableTable) {
  ASSERT_EQ(run("solve --env pong --model-episodes 300 --out p"), 0);
  const auto j = nlohmann::json::parse(read("p/policy.json"));
  EXPECT_EQ(j.at("kind"), "coarse-pong-table");
  EXPECT_EQ(j.at("ticks_per_step"), 5);
}

TEST_F(Cli, SameSeedGivesByteIdenticalOutputs) {
  const std::pair<std::string, std::string> runs[] = {
      {kShortTrain, "metrics.csv"},
      {"estimate --transitions 5000", "estimate.csv"},
      {"balance --model-episodes 300 --episodes 40", "balance.csv"},
      {"deep-train --steps 600 --learning-starts 200 --eval-episodes 2", "episodes.csv"},
      {"sweep --beta-op-grid -5 5 --episodes 100 --workers 2", "heatmap.csv"},
  };
  for (const auto& [args, csv] : runs) {
    ASSERT_EQ(run(args + " --seed 9 --out a"), 0) << args;
    ASSERT_EQ(run(args + " --seed 9 --out b"), 0) << args;
    EXPECT_EQ(read("a/" + csv), read("b/" + csv)) << args;
    EXPECT_EQ(manifest("a").at("input_hash"), manifest("b").at("input_hash")) << args;
    EXPECT_EQ(manifest("a").at("outputs"), manifest("b").at("outputs")) << args;
    ASSERT_EQ(run(args + " --seed 10 --out c"), 0) << args;
    EXPECT_NE(manifest("a").at("input_hash"), manifest("c").at("input_hash")) << args;
  }
}

TEST_F(Cli, SweepIsIndependentOfWorkerCount) {
  const std::string args = "sweep --beta-pl-grid 5 20 --beta-op-grid -10 0 10 --episodes 100";
  ASSERT_EQ(run(args + " --workers 1 --out w1"), 0);
  ASSERT_EQ(run(args + " --workers 3 --out w3"), 0);
  EXPECT_EQ(read("w1/heatmap.csv"), read("w3/heatmap.csv"));
  EXPECT_EQ(lines("w1/heatmap.csv"), 1u + 6u);
  EXPECT_EQ(read("w1/cells/pl1_op2.csv"), read("w3/cells/pl1_op2.csv"));
}

TEST_F(Cli, OneByOneSweepEqualsTrain) {
  ASSERT_EQ(run(std::string(kShortTrain) + " --seed 4 --out t"), 0);
  ASSERT_EQ(run("sweep --beta-pl-grid 20 --beta-op-grid 5 --episodes 200 --seed 4 --out s"), 0);
  EXPECT_EQ(read("t/metrics.csv"), read("s/cells/pl0_op0.csv"));
  std::istringstream heat(read("s/heatmap.csv"));
  std::string header, row;
  std::getline(heat, header);
  std::getline(heat, row);
  std::istringstream cells(row);
  std::string bpl, bop, reward;
  std::getline(cells, bpl, ',');
  std::getline(cells, bop, ',');
  std::getline(cells, reward, ',');
  EXPECT_EQ(std::stod(reward), manifest("t").at("summary").at("eval_mean_reward").get<double>());
}

TEST_F(Cli, SweepRecordsFailedCellsWithoutAborting) {
  ASSERT_EQ(run("sweep --beta-op-grid 0 nan --episodes 50 --out s"), 0);
  const auto text = read("s/heatmap.csv");
  EXPECT_NE(text.find(",ok\n"), std::string::npos);
  EXPECT_NE(text.find("NaN"), std::string::npos);
  EXPECT_EQ(manifest("s").at("summary").at("failed"), 1);
}

TEST_F(Cli, ManifestReplayReproducesTheRun) {
  ASSERT_EQ(run(std::string(kShortTrain) + " --alpha 0.3 --seed 12 --out first"), 0);
  ASSERT_EQ(run("--config first/manifest.json train --out second"), 0);
  EXPECT_EQ(read("first/metrics.csv"), read("second/metrics.csv"));
  EXPECT_EQ(read("first/q.json"), read("second/q.json"));
  EXPECT_EQ(manifest("first").at("input_hash"), manifest("second").at("input_hash"));
  EXPECT_EQ(manifest("second").at("config").at("train").at("alpha"), 0.3);
}

TEST_F(Cli, FlagsOverrideTheConfigFile) {
  write("run.toml",
        "seed = 6\n"
        "[train]\n"
        "env = \"gridworld\"\n"
        "beta_pl = 5.0\n"
        "beta-op = -5.0\n"
        "episodes = 150\n");
  ASSERT_EQ(run("--config run.toml train --episodes 100 --out t"), 0);
  const auto cfg = manifest("t").at("config");
  EXPECT_EQ(cfg.at("seed"), 6);
  EXPECT_EQ(cfg.at("train").at("beta-pl"), 5.0);
  EXPECT_EQ(cfg.at("train").at("episodes"), 100);
  EXPECT_EQ(manifest("t").at("config_file").at("path"), "run.toml");
}

TEST_F(Cli, SeedFromEnvironmentIsTheDefault) {
  ASSERT_EQ(run(std::string(kShortTrain) + " --out e", "SOFTGAMES_SEED=21"), 0);
  EXPECT_EQ(manifest("e").at("config").at("seed"), 21);
  ASSERT_EQ(run(std::string(kShortTrain) + " --seed 21 --out f"), 0);
  EXPECT_EQ(read("e/metrics.csv"), read("f/metrics.csv"));
  ASSERT_EQ(run(std::string(kShortTrain) + " --seed 3 --out g", "SOFTGAMES_SEED=21"), 0);
  EXPECT_EQ(manifest("g").at("config").at("seed"), 3);
  write("seed.toml", "seed = 4\n");
  ASSERT_EQ(run("--config seed.toml " + std::string(kShortTrain) + " --out h",
                "SOFTGAMES_SEED=21"),
            0);
  EXPECT_EQ(manifest("h").at("config").at("seed"), 4);
}

TEST_F(Cli, OutputHashesAreGitBlobHashes) {
  ASSERT_EQ(run("solve --out s"), 0);
  if (std::system("git --version >/dev/null 2>&1") != 0) GTEST_SKIP() << "git not available";
  const std::string cmd = "git hash-object '" + (dir_ / "s/q.csv").string() + "' > '" +
                          (dir_ / "hash.txt").string() + "'";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  auto hash = read("hash.txt");
  hash.erase(hash.find_last_not_of("\n") + 1);
  EXPECT_EQ(manifest("s").at("outputs").at("q.csv"), hash);
}

TEST_F(Cli, ConfigErrorsExitWithTwo) {
  write("extra.toml", "[train]\nnot_an_option = 1\n");
  write("empty.toml", "[sweep]\nbeta-op-grid = []\n");
  write("broken.toml", "[train\n");
  const char* cases[] = {
      "",
      "train --env chess",
      "train --alpha 1.5",
      "train --episodes many",
      "--config missing.toml train",
      "--config extra.toml train",
      "--config broken.toml train",
      "--config empty.toml sweep",
      "sweep --workers -1",
      "estimate --window 0",
      "balance --beta-pl-min 5 --beta-pl-max 1",
      "deep-train --batch 0",
      "serve --checkpoint missing.json",
      "serve --tick-rate -1",
  };
  for (const char* args : cases) EXPECT_EQ(run(args), 2) << args;
  EXPECT_EQ(run(std::string(kShortTrain) + " --out ok", "SOFTGAMES_SEED=abc"), 2);
}

TEST_F(Cli, NumericDivergenceExitsWithThree) {
  EXPECT_EQ(run("estimate --env random --states 3 --actions-pl 2 --actions-op 2 "
                "--alpha2 1e12 --no-decay --transitions 2000 --out d"),
            3);
  EXPECT_NE(read("stderr.txt").find("divergence"), std::string::npos);
}

TEST_F(Cli, EstimateRecoversHiddenBeta) {
  ASSERT_EQ(run("estimate --beta-pl 10 --true-beta-op 5 --init -8 --seed 1 --out e"), 0);
  const double beta = manifest("e").at("summary").at("beta_op_hat").get<double>();
  EXPECT_NEAR(beta, 5.0, 0.5);
  EXPECT_EQ(lines("e/estimate.csv"), 1u + 200001u);
}

}  // namespace
