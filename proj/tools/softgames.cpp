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


// softgames: command-line entry point for solving, training, estimation,
// balancing, deep training, sweeps and the live play server.

#include <signal.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "softgames/core/types.hpp"
#include "softgames/server/policy_source.hpp"
#include "softgames/server/server.hpp"
#include "toml_config.hpp"

namespace {

namespace fs = std::filesystem;
namespace sg = softgames;
namespace tools = softgames::tools;

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

// Keeps, per command, a JSON reader for every bound variable so the resolved
// configuration can be written to the manifest.
class Registry {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& desc) {
    auto* opt = app->add_option("--" + name, var, desc)->capture_default_str();
    readers_[app->get_name()].emplace_back(name, [&var] { return to_json(var); });
    return opt;
  }
  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& desc) {
    auto* opt = app->add_flag("--" + name, var, desc);
    readers_[app->get_name()].emplace_back(name, [&var] { return nlohmann::json(var); });
    return opt;
  }

  nlohmann::json resolved(const std::string& sub) const {
    nlohmann::json out = nlohmann::json::object();
    auto fill = [](nlohmann::json& dst, const auto& list) {
      for (const auto& [name, read] : list) {
        auto v = read();
        if (!v.is_null()) dst[name] = std::move(v);
      }
    };
    if (const auto it = readers_.find(""); it != readers_.end()) fill(out, it->second);
    if (const auto it = readers_.find(sub); it != readers_.end()) {
      nlohmann::json section = nlohmann::json::object();
      fill(section, it->second);
      out[sub] = std::move(section);
    }
    return out;
  }

 private:
  template <typename T>
  static nlohmann::json to_json(const T& v) {
    if constexpr (std::is_same_v<T, fs::path>) {
      return v.string();
    } else if constexpr (requires { v.has_value(); }) {
      return v ? nlohmann::json(*v) : nlohmann::json();
    } else {
      return nlohmann::json(v);
    }
  }

  std::map<std::string, std::vector<std::pair<std::string, std::function<nlohmann::json()>>>>
      readers_;
};

void add_env_options(Registry& r, CLI::App* app, tools::EnvOptions& e, bool pong_only = false) {
  if (!pong_only) {
    r.add(app, "env", e.kind, "Environment: gridworld, pong (coarse) or random")
        ->check(CLI::IsMember({"gridworld", "pong", "random"}));
    r.add(app, "states", e.states, "Random game: number of states");
    r.add(app, "actions-pl", e.actions_pl, "Random game: player actions");
    r.add(app, "actions-op", e.actions_op, "Random game: opponent actions");
    r.add(app, "max-successors", e.max_successors, "Random game: successors per joint action (0 = all)");
    r.add(app, "game-seed", e.game_seed, "Random game: generator seed");
    r.add(app, "max-steps", e.max_steps, "Random game: episode length");
    r.add(app, "capacity", e.capacity, "Coarse Pong: state table capacity for TD training");
  }
  r.add(app, "gamma", e.gamma, "Discount override (grid-world 0.9, random 0.9, Pong 0.7 per decision)");
  r.add(app, "bins", e.bins, "Coarse Pong: bins per kept dimension");
  r.add(app, "ticks", e.ticks, "Coarse Pong: ticks per decision");
  r.add(app, "model-episodes", e.model_episodes, "Coarse Pong: exploration episodes for the model");
  r.add(app, "representatives", e.representatives, "Coarse Pong: sampled states per bin");
}

constexpr const char* kMetricsColumns =
    "metrics.csv: episode,mean_reward,bellman_error,beta_op_hat,beta_pl\n"
    "  mean_reward and bellman_error (mean |soft TD error|) average the\n"
    "  episodes since the previous row; beta_op_hat is empty without estimation.\n";

int run_serve(const sg::server::ServerOptions& opts, const fs::path& checkpoint,
              const tools::EnvOptions& env, std::uint64_t seed) {
  std::shared_ptr<const sg::server::PolicySource> source;
  if (checkpoint.empty()) {
    std::cerr << "softgames: no checkpoint given; solving the default coarse Pong table\n";
    source = sg::server::solve_coarse_pong_table(env.pong(), env.pong_model(seed));
  } else {
    source = sg::server::load_policy_source(checkpoint);
  }
  // Block termination signals before worker threads start, then wait for one.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  sg::server::PlayServer server(source, opts);
  const auto port = server.start();
  std::cout << "softgames: serving " << source->kind() << " policy on http://" << opts.address
            << ':' << port << " (WebSocket /ws)" << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-player soft Q-learning: solve, train, estimate, balance, serve."};
  app.config_formatter(std::make_shared<tools::TomlConfig>());
  app.set_config("--config", "", "TOML config file or a run manifest; flags win");
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.option_defaults()->always_capture_default();
  app.footer("Exit codes: 0 success, 2 configuration error, 3 numeric divergence.\n"
             "SOFTGAMES_SEED sets the seed when neither --seed nor the config does.");

  Registry reg;
  std::uint64_t seed = 0;
  fs::path out_dir = "softgames-out";
  auto* seed_opt = reg.add(&app, "seed", seed, "Random seed");
  reg.add(&app, "out", out_dir, "Output directory");

  tools::SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Soft value iteration on a known model");
  add_env_options(reg, solve_cmd, solve.env);
  reg.add(solve_cmd, "beta-pl", solve.beta.beta_pl, "Player inverse temperature");
  reg.add(solve_cmd, "beta-op", solve.beta.beta_op, "Opponent inverse temperature");
  reg.add(solve_cmd, "tol", solve.tol, "Sup-norm stopping tolerance");
  reg.add(solve_cmd, "max-iters", solve.max_iters, "Iteration limit");
  solve_cmd->footer(
      "Outputs:\n"
      "  value.csv: state,value\n"
      "  q.csv: state,a_pl,a_op,q\n"
      "  policy.csv: state,agent,action,prob (agent = player | opponent)\n"
      "  q.json: table checkpoint; policy.json (pong only): servable table");

  tools::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Two-player soft Q-learning");
  add_env_options(reg, train_cmd, train.env);
  reg.add(train_cmd, "beta-pl", train.beta.beta_pl, "Player inverse temperature");
  reg.add(train_cmd, "beta-op", train.beta.beta_op, "Opponent inverse temperature");
  reg.add(train_cmd, "alpha", train.alpha, "TD step size in (0, 1]");
  reg.add(train_cmd, "episodes", train.episodes, "Training episodes");
  reg.add(train_cmd, "eval-every", train.eval_every, "Episodes per metrics row");
  reg.add(train_cmd, "eval-episodes", train.eval_episodes, "Episodes for the final evaluation");
  reg.flag(train_cmd, "stop-on-plateau", train.stop_on_plateau,
           "Stop once the Bellman error plateaus");
  train_cmd->footer(std::string("Outputs:\n  ") + kMetricsColumns +
                    "  q.json: table checkpoint; policy.json (pong only): servable table");

  tools::EstimateOptions est;
  auto* est_cmd = app.add_subcommand("estimate", "Learn while estimating a hidden opponent beta");
  add_env_options(reg, est_cmd, est.env);
  reg.add(est_cmd, "beta-pl", est.beta_pl, "Player inverse temperature");
  reg.add(est_cmd, "true-beta-op", est.true_beta_op, "Hidden opponent inverse temperature");
  reg.add(est_cmd, "init", est.init, "Initial estimate");
  reg.add(est_cmd, "alpha", est.alpha, "TD step size");
  reg.add(est_cmd, "alpha2", est.alpha2, "Estimator step size");
  reg.flag(est_cmd, "no-decay", est.no_decay, "Constant estimator step (default alpha2/sqrt(j))");
  reg.add(est_cmd, "window", est.window, "Observations in the likelihood window");
  reg.add(est_cmd, "transitions", est.transitions, "Transition budget");
  reg.add(est_cmd, "eval-every", est.eval_every, "Episodes per metrics row");
  est_cmd->footer(std::string("Outputs:\n  ") + kMetricsColumns +
                  "  estimate.csv: transition,beta_op_hat,loss,grad (estimate before each\n"
                  "    step; the last row holds the final estimate)\n"
                  "  q.json: table checkpoint");

  tools::BalanceOptions bal;
  bal.env.kind = "pong";
  auto* bal_cmd = app.add_subcommand("balance", "Adapt beta_pl to an estimated opponent");
  add_env_options(reg, bal_cmd, bal.env);
  reg.add(bal_cmd, "table-beta-pl", bal.table_beta_pl, "Beta_pl the frozen table is solved at");
  reg.add(bal_cmd, "table-beta-op", bal.table_beta_op, "Beta_op the frozen table is solved at");
  reg.add(bal_cmd, "true-beta-op", bal.true_beta_op, "Hidden opponent inverse temperature");
  reg.add(bal_cmd, "delta", bal.delta, "Balancing offset: beta_pl = |beta_op_hat| + delta");
  reg.add(bal_cmd, "update-every", bal.update_every, "Episodes between rebalances (0 = never)");
  reg.add(bal_cmd, "initial-beta-pl", bal.initial_beta_pl,
          "Starting beta_pl (default: balance of the initial estimate)");
  reg.add(bal_cmd, "init", bal.init, "Initial estimate");
  reg.add(bal_cmd, "alpha2", bal.alpha2, "Estimator step size");
  reg.add(bal_cmd, "episodes", bal.episodes, "Episodes");
  reg.add(bal_cmd, "beta-pl-min", bal.beta_pl_lo, "Lower clamp of beta_pl");
  reg.add(bal_cmd, "beta-pl-max", bal.beta_pl_hi, "Upper clamp of beta_pl");
  bal_cmd->footer(
      "Outputs:\n"
      "  balance.csv: episode,beta_op_hat,beta_pl,delta,avg_reward\n"
      "    beta_op_hat and beta_pl after the episode; avg_reward is the running\n"
      "    mean episode reward.");

  tools::DeepOptions deep;
  auto* deep_cmd = app.add_subcommand("deep-train", "Deep soft Q-learning on continuous Pong");
  reg.add(deep_cmd, "beta-pl", deep.beta_pl, "Player inverse temperature");
  reg.add(deep_cmd, "beta-op", deep.beta_op, "Opponent inverse temperature");
  reg.add(deep_cmd, "gamma", deep.gamma, "Discount per decision");
  reg.add(deep_cmd, "lr", deep.lr, "Adam step size");
  reg.add(deep_cmd, "batch", deep.batch, "Minibatch size");
  reg.add(deep_cmd, "replay", deep.replay, "Replay capacity");
  reg.add(deep_cmd, "target-sync", deep.target_sync, "Updates between target syncs");
  reg.add(deep_cmd, "steps", deep.steps, "Environment steps");
  reg.add(deep_cmd, "learning-starts", deep.learning_starts, "Transitions before updates begin");
  reg.add(deep_cmd, "ticks", deep.ticks, "Ticks per decision");
  reg.add(deep_cmd, "hidden1", deep.hidden1, "First hidden layer width");
  reg.add(deep_cmd, "hidden2", deep.hidden2, "Second hidden layer width");
  reg.add(deep_cmd, "eval-episodes", deep.eval_episodes, "Episodes for the final evaluation");
  deep_cmd->footer(
      "Outputs:\n"
      "  episodes.csv: episode,step,reward,mean_loss (step = environment steps so\n"
      "    far; mean_loss over the episode's updates, 0 before learning starts)\n"
      "  network.json + network.bin: checkpoint (servable)");

  tools::SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train over a beta_pl x beta_op grid");
  add_env_options(reg, sweep_cmd, sweep.train.env);
  reg.add(sweep_cmd, "beta-pl-grid", sweep.beta_pl_grid, "Player betas");
  reg.add(sweep_cmd, "beta-op-grid", sweep.beta_op_grid, "Opponent betas");
  reg.add(sweep_cmd, "alpha", sweep.train.alpha, "TD step size in (0, 1]");
  reg.add(sweep_cmd, "episodes", sweep.train.episodes, "Training episodes per cell");
  reg.add(sweep_cmd, "eval-every", sweep.train.eval_every, "Episodes per metrics row");
  reg.add(sweep_cmd, "eval-episodes", sweep.train.eval_episodes, "Evaluation episodes per cell");
  reg.add(sweep_cmd, "workers", sweep.workers, "Concurrent cells (0 = hardware threads)");
  sweep_cmd->footer(
      "Outputs:\n"
      "  heatmap.csv: beta_pl,beta_op,mean_reward,bellman_error,episodes_run,status\n"
      "    mean_reward is the evaluated reward of the trained table; status is ok\n"
      "    or the cell's error message (other columns empty).\n"
      "  cells/plI_opJ.csv: per-cell metrics with the train metrics.csv columns");

  sg::server::ServerOptions serve;
  fs::path checkpoint;
  tools::EnvOptions serve_env;
  serve_env.kind = "pong";
  auto* serve_cmd = app.add_subcommand("serve", "Live play server (HTTP + WebSocket)");
  reg.add(serve_cmd, "checkpoint", checkpoint,
          "policy.json table or network stem (default: solve a coarse Pong table)");
  reg.add(serve_cmd, "address", serve.address, "Bind address");
  reg.add(serve_cmd, "port", serve.port, "Port (0 picks a free one)");
  reg.add(serve_cmd, "tick-rate", serve.tick_rate, "Ticks per second (0 = one per action)");
  reg.add(serve_cmd, "ui-dir", serve.ui_dir, "Static UI bundle served under /");
  reg.add(serve_cmd, "delta", serve.session.balance.delta, "Initial balancing offset");
  reg.add(serve_cmd, "alpha2", serve.session.alpha2, "Estimator step size");
  reg.add(serve_cmd, "init", serve.session.initial_beta_op_hat, "Initial estimate");
  reg.add(serve_cmd, "threads", serve.threads, "I/O threads (0 = hardware threads)");
  add_env_options(reg, serve_cmd, serve_env, /*pong_only=*/true);
  serve_cmd->footer(
      "Endpoints: GET /healthz, GET / (UI bundle), WebSocket /ws.\n"
      "Messages are {\"v\":1,\"type\":T,\"body\":{...}}; T = action {h,v},\n"
      "config {delta}, reset {} from the client and state from the server.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (seed_opt->count() == 0) {
    if (const char* env = std::getenv("SOFTGAMES_SEED")) {
      try {
        std::size_t used = 0;
        seed = std::stoull(env, &used);
        if (env[used] != '\0') throw std::invalid_argument(env);
      } catch (const std::exception&) {
        std::cerr << "softgames: SOFTGAMES_SEED must be an unsigned integer\n";
        return kExitConfig;
      }
    }
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "serve") {
      serve.session.seed = seed;
      try {
        serve.validate();
      } catch (const std::invalid_argument& e) {
        throw tools::ConfigError(e.what());
      }
      serve_env.validate();
      if (!serve.ui_dir.empty() && !fs::is_directory(serve.ui_dir)) {
        throw tools::ConfigError("ui-dir is not a directory: " + serve.ui_dir.string());
      }
      if (!checkpoint.empty() && !fs::exists(checkpoint) &&
          !fs::exists(fs::path(checkpoint).concat(".json"))) {
        throw tools::ConfigError("checkpoint not found: " + checkpoint.string());
      }
      return run_serve(serve, checkpoint, serve_env, seed);
    }

    tools::OutputDir out(out_dir);
    nlohmann::json summary;
    if (name == "solve") summary = tools::run_solve(solve, seed, out);
    if (name == "train") summary = tools::run_train(train, seed, out);
    if (name == "estimate") summary = tools::run_estimate(est, seed, out);
    if (name == "balance") summary = tools::run_balance(bal, seed, out);
    if (name == "deep-train") summary = tools::run_deep(deep, seed, out);
    if (name == "sweep") summary = tools::run_sweep(sweep, seed, out);

    tools::Manifest manifest(name, reg.resolved(name));
    if (const auto* cfg = app.get_config_ptr(); cfg->count() > 0) {
      manifest.set_config_file(cfg->as<std::string>());
    }
    for (const auto& p : out.written()) manifest.add_output(p);
    manifest.set_summary(summary);
    manifest.write(out.path());
    std::cout << summary.dump() << '\n';
    return 0;
  } catch (const sg::DivergenceError& e) {
    std::cerr << "softgames: divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const tools::ConfigError& e) {
    std::cerr << "softgames: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "softgames: error: " << e.what() << '\n';
    return 1;
  }
}
