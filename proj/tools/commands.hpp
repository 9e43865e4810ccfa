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


// Subcommand implementations of the softgames tool. Each runner writes its
// CSVs and checkpoints into the output directory and returns a JSON summary
// that ends up in manifest.json.

#ifndef SOFTGAMES_TOOLS_COMMANDS_HPP_
#define SOFTGAMES_TOOLS_COMMANDS_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "softgames/balancer.hpp"
#include "softgames/core/checkpoint.hpp"
#include "softgames/core/random_game.hpp"
#include "softgames/core/soft_ops.hpp"
#include "softgames/deep/train.hpp"
#include "softgames/envs/coarse_pong_model.hpp"
#include "softgames/envs/gridworld.hpp"
#include "softgames/envs/pong.hpp"
#include "softgames/envs/tabular.hpp"
#include "softgames/estimator.hpp"
#include "softgames/learner.hpp"
#include "softgames/server/policy_source.hpp"

namespace softgames::tools {

namespace fs = std::filesystem;

/// Invalid user configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvOptions {
  std::string kind = "gridworld";  // gridworld | pong | random
  std::optional<double> gamma;     // overrides the environment's discount
  // random game
  std::size_t states = 10;
  std::size_t actions_pl = 3;
  std::size_t actions_op = 3;
  std::size_t max_successors = 0;
  std::uint64_t game_seed = 0;
  int max_steps = 200;
  // coarse Pong
  int bins = 6;
  int ticks = 5;
  std::size_t capacity = 100000;
  int model_episodes = 20000;
  int representatives = 8;

  envs::GridWorldConfig grid() const {
    envs::GridWorldConfig c;
    if (gamma) c.gamma = *gamma;
    return c;
  }
  RandomGameSpec random() const {
    RandomGameSpec s;
    s.n_states = states;
    s.n_actions_pl = actions_pl;
    s.n_actions_op = actions_op;
    s.gamma = gamma.value_or(0.9);
    s.max_successors = max_successors;
    return s;
  }
  envs::CoarsePongConfig pong() const {
    envs::CoarsePongConfig c;
    c.bins = bins;
    c.ticks_per_step = ticks;
    c.capacity = capacity;
    if (gamma) c.gamma = *gamma;
    return c;
  }
  envs::CoarsePongModelOptions pong_model(std::uint64_t seed) const {
    envs::CoarsePongModelOptions o;
    o.episodes = model_episodes;
    o.representatives = representatives;
    o.seed = seed;
    return o;
  }
  std::size_t n_actions_pl() const {
    if (kind == "gridworld") return envs::GridWorldConfig::kNumActions;
    if (kind == "pong") return envs::kPongNumActions;
    return actions_pl;
  }
  std::size_t n_actions_op() const {
    if (kind == "gridworld") return envs::GridWorldConfig::kNumActions;
    if (kind == "pong") return envs::kPongNumActions;
    return actions_op;
  }

  void validate() const {
    if (kind != "gridworld" && kind != "pong" && kind != "random") {
      throw ConfigError("env must be gridworld, pong or random");
    }
    if (gamma && !(*gamma >= 0.0 && *gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (states < 1 || actions_pl < 1 || actions_op < 1) {
      throw ConfigError("random game needs at least one state and action");
    }
    if (max_steps < 1) throw ConfigError("max-steps must be >= 1");
    if (bins < 2 || bins > envs::kMaxPongBins || ticks < 1 || capacity < 2) {
      throw ConfigError("bad coarse Pong layout");
    }
    if (model_episodes < 1 || representatives < 1) throw ConfigError("bad Pong model options");
  }
};

/// Model of a tabular environment: exact for grid-world and random games,
/// empirical for coarse Pong.
struct TabularModel {
  GameModel model;
  std::optional<envs::CoarsePongModel> pong;
};

inline TabularModel make_model(const EnvOptions& e, std::uint64_t seed) {
  if (e.kind == "gridworld") return {envs::gridworld_model(e.grid()), std::nullopt};
  if (e.kind == "random") return {random_game(e.random(), e.game_seed), std::nullopt};
  auto pong = envs::build_coarse_pong_model(e.pong(), e.pong_model(seed));
  GameModel m = pong.model;
  return {std::move(m), std::move(pong)};
}

/// Calls f(env) with a freshly built sampling environment.
template <typename F>
decltype(auto) with_env(const EnvOptions& e, F&& f) {
  if (e.kind == "gridworld") {
    envs::GridWorldEnv env(e.grid());
    return f(env);
  }
  if (e.kind == "pong") {
    envs::CoarsePongEnv env(e.pong());
    return f(env);
  }
  const auto model = random_game(e.random(), e.game_seed);
  envs::ModelEnv env(model, e.max_steps);
  env.set_random_starts(true);
  return f(env);
}

struct Rationality {
  double beta_pl = 20.0;
  double beta_op = -20.0;
  RationalityParams params(const EnvOptions& e) const {
    return RationalityParams::uniform(beta_pl, beta_op, e.n_actions_pl(), e.n_actions_op());
  }
};

// ---------------------------------------------------------------- output

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string());
  }
  const fs::path& path() const { return dir_; }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out.precision(17);
    written_.push_back(dir_ / name);
    return out;
  }
  void record(const fs::path& p) { written_.push_back(p); }
  const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

inline void write_q_csv(std::ostream& out, const JointQ& q) {
  out << "state,a_pl,a_op,q\n";
  for (StateId s = 0; s < q.n_states(); ++s) {
    for (ActionId a = 0; a < q.n_actions_pl(); ++a) {
      for (ActionId b = 0; b < q.n_actions_op(); ++b) {
        out << s << ',' << a << ',' << b << ',' << q(s, a, b) << '\n';
      }
    }
  }
}

inline void write_policy_csv(std::ostream& out, const PolicyTable& pl, const PolicyTable& op) {
  out << "state,agent,action,prob\n";
  auto rows = [&](const PolicyTable& t, const char* agent) {
    for (StateId s = 0; s < t.n_states(); ++s) {
      for (ActionId a = 0; a < t.n_actions; ++a) {
        out << s << ',' << agent << ',' << a << ',' << t.probs[s * t.n_actions + a] << '\n';
      }
    }
  };
  rows(pl, "player");
  rows(op, "opponent");
}

inline void save_q(OutputDir& out, const JointQ& q) {
  write_json_file(out.path() / "q.json", to_json(q));
  out.record(out.path() / "q.json");
}

// ------------------------------------------------------------------ solve

struct SolveOptions {
  EnvOptions env;
  Rationality beta;
  double tol = 1e-8;
  int max_iters = 1000000;
};

inline nlohmann::json run_solve(const SolveOptions& o, std::uint64_t seed, OutputDir& out) {
  o.env.validate();
  if (!(o.tol > 0.0) || o.max_iters < 1) throw ConfigError("tol and max-iters must be positive");
  const auto m = make_model(o.env, seed);
  const auto params = o.beta.params(o.env);
  const auto vi = solve_value_iteration(m.model, params, o.tol, o.max_iters);
  {
    auto f = out.open("value.csv");
    f << "state,value\n";
    for (StateId s = 0; s < vi.value.size(); ++s) f << s << ',' << vi.value[s] << '\n';
  }
  {
    auto f = out.open("q.csv");
    write_q_csv(f, vi.q);
  }
  {
    auto f = out.open("policy.csv");
    write_policy_csv(f, vi.pi_pl, vi.pi_op);
  }
  save_q(out, vi.q);
  if (m.pong) {
    server::TablePolicySource src(vi.q, m.pong->keys, o.env.pong());
    server::save_table_policy(out.path() / "policy.json", src);
    out.record(out.path() / "policy.json");
  }
  nlohmann::json summary = {{"iterations", vi.iterations},
                            {"last_delta", vi.last_delta},
                            {"n_states", m.model.n_states()}};
  if (o.env.kind == "gridworld") {
    summary["value_start"] = vi.value[envs::gridworld_index(envs::gridworld_reset(o.env.grid()))];
  }
  return summary;
}

// ------------------------------------------------------------------ train

struct TrainOptions {
  EnvOptions env;
  Rationality beta;
  double alpha = 0.5;
  int episodes = 2000;
  int eval_every = 50;
  int eval_episodes = 200;
  bool stop_on_plateau = false;

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.alpha = alpha;
    c.episodes = episodes;
    c.eval_every = eval_every;
    c.params = beta.params(env);
    c.seed = seed;
    c.stop_on_plateau = stop_on_plateau;
    c.max_episode_steps = env.kind == "random" ? env.max_steps : c.max_episode_steps;
    return c;
  }
  void validate() const {
    env.validate();
    if (eval_episodes < 1) throw ConfigError("eval-episodes must be >= 1");
    try {
      config(0).validate(false);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

struct TrainOutcome {
  TrainResult result;
  EvalResult eval;
  std::vector<std::uint64_t> pong_keys;
};

/// Trains once and evaluates the frozen table; the unit of both train and
/// each sweep cell, so a 1 x 1 sweep reproduces a train run.
inline TrainOutcome train_once(const TrainOptions& o, std::uint64_t seed) {
  const auto cfg = o.config(seed);
  return with_env(o.env, [&](auto& env) {
    TrainOutcome t{train_tabular(env, cfg), {}, {}};
    if constexpr (std::is_same_v<std::decay_t<decltype(env)>, envs::CoarsePongEnv>) {
      env.freeze(true);
      t.pong_keys = env.interner().keys();
    }
    t.eval = evaluate(env, t.result.q, cfg.params, o.eval_episodes, seed + 1000, {},
                      cfg.max_episode_steps);
    return t;
  });
}

inline nlohmann::json run_train(const TrainOptions& o, std::uint64_t seed, OutputDir& out) {
  o.validate();
  const auto t = train_once(o, seed);
  {
    auto f = out.open("metrics.csv");
    write_metrics_csv(f, t.result.metrics);
  }
  save_q(out, t.result.q);
  if (o.env.kind == "pong") {
    server::TablePolicySource src(t.result.q, t.pong_keys, o.env.pong());
    server::save_table_policy(out.path() / "policy.json", src);
    out.record(out.path() / "policy.json");
  }
  return {{"episodes_run", t.result.episodes_run},
          {"eval_mean_reward", t.eval.mean_reward},
          {"eval_bellman_error", t.eval.bellman_error}};
}

// --------------------------------------------------------------- estimate

struct EstimateOptions {
  EnvOptions env;
  double beta_pl = 10.0;
  double true_beta_op = 5.0;
  double init = 0.0;
  double alpha = 0.5;
  double alpha2 = 0.05;
  bool no_decay = false;
  std::size_t window = 512;
  std::uint64_t transitions = 200000;
  int eval_every = 50;
};

inline nlohmann::json run_estimate(const EstimateOptions& o, std::uint64_t seed,
                                   OutputDir& out) {
  o.env.validate();
  if (o.transitions < 1 || o.window < 1) throw ConfigError("transitions and window must be >= 1");
  TrainConfig cfg;
  cfg.alpha = o.alpha;
  cfg.alpha2 = o.alpha2;
  cfg.alpha2_decay = !o.no_decay;
  cfg.episodes = std::numeric_limits<int>::max();
  cfg.eval_every = o.eval_every;
  cfg.params = Rationality{o.beta_pl, o.true_beta_op}.params(o.env);
  cfg.seed = seed;
  cfg.estimator_window = o.window;
  if (o.env.kind == "random") cfg.max_episode_steps = o.env.max_steps;
  try {
    cfg.validate(true);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto r = with_env(o.env, [&](auto& env) {
    return train_tabular_with_estimation(env, cfg, o.init,
                                         shared_table_opponent(cfg.params), o.transitions);
  });
  {
    auto f = out.open("metrics.csv");
    write_metrics_csv(f, r.metrics);
  }
  {
    auto f = out.open("estimate.csv");
    f << "transition,beta_op_hat,loss,grad\n";
    const auto& e = r.estimator;
    for (std::size_t i = 0; i < e.beta_history.size(); ++i) {
      f << i << ',' << e.beta_history[i] << ',' << e.loss_history[i] << ','
        << e.grad_history[i] << '\n';
    }
    f << e.beta_history.size() << ',' << e.beta_op_hat << ",,\n";
  }
  save_q(out, r.q);
  return {{"transitions", r.transitions},
          {"episodes_run", r.episodes_run},
          {"beta_op_hat", r.estimator.beta_op_hat},
          {"abs_error", std::abs(r.estimator.beta_op_hat - o.true_beta_op)}};
}

// ---------------------------------------------------------------- balance

struct BalanceOptions {
  EnvOptions env;
  double table_beta_pl = 50.0;
  double table_beta_op = -20.0;
  double true_beta_op = -20.0;
  double delta = 0.0;
  int update_every = 10;  // 0 = never rebalance
  std::optional<double> initial_beta_pl;
  double init = 0.0;
  double alpha2 = 10.0;
  int episodes = 500;
  double beta_pl_lo = 0.1;
  double beta_pl_hi = 100.0;
};

/// Frozen table for balancing: the soft fixed point of the environment model.
inline std::pair<JointQ, TabularModel> balancing_table(const BalanceOptions& o,
                                                       std::uint64_t seed) {
  auto m = make_model(o.env, seed);
  const auto params = RationalityParams::uniform(o.table_beta_pl, o.table_beta_op,
                                                 o.env.n_actions_pl(), o.env.n_actions_op());
  auto vi = solve_value_iteration(m.model, params, 1e-8, 1000000);
  return {std::move(vi.q), std::move(m)};
}

inline nlohmann::json run_balance(const BalanceOptions& o, std::uint64_t seed, OutputDir& out) {
  o.env.validate();
  BalanceConfig bc;
  bc.delta = o.delta;
  bc.update_every = o.update_every == 0 ? BalanceConfig::kNever : o.update_every;
  bc.beta_pl_lo = o.beta_pl_lo;
  bc.beta_pl_hi = o.beta_pl_hi;
  BalancedPlayOptions po;
  po.episodes = o.episodes;
  po.seed = seed;
  po.initial_beta_pl = o.initial_beta_pl;
  po.true_beta_op = o.true_beta_op;
  if (o.env.kind == "random") po.max_episode_steps = o.env.max_steps;
  if (o.update_every < 0 || o.episodes < 1 || !(o.alpha2 > 0.0)) {
    throw ConfigError("update-every must be >= 0, episodes >= 1 and alpha2 > 0");
  }
  try {
    bc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto [table, m] = balancing_table(o, seed);
  EstimatorState est;
  est.beta_op_hat = o.init;
  est.alpha2 = o.alpha2;
  BalanceResult r;
  if (m.pong) {
    auto env = m.pong->make_env(o.env.pong());
    r = balanced_play(env, table, est, bc, po);
  } else if (o.env.kind == "gridworld") {
    envs::GridWorldEnv env(o.env.grid());
    r = balanced_play(env, table, est, bc, po);
  } else {
    envs::ModelEnv env(m.model, o.env.max_steps);
    env.set_random_starts(true);
    r = balanced_play(env, table, est, bc, po);
  }
  {
    auto f = out.open("balance.csv");
    write_balance_csv(f, r.rows);
  }
  return {{"mean_reward", r.mean_return()},
          {"beta_op_hat", r.estimator.beta_op_hat},
          {"beta_pl", r.beta_pl}};
}

// ------------------------------------------------------------- deep-train

struct DeepOptions {
  double beta_pl = 20.0;
  double beta_op = -50.0;
  double gamma = 0.99;
  double lr = 1e-4;
  std::size_t batch = 32;
  std::size_t replay = 50000;
  std::size_t target_sync = 3000;
  std::uint64_t steps = 100000;
  std::size_t learning_starts = 1000;
  int ticks = 4;
  std::size_t hidden1 = 100;
  std::size_t hidden2 = 100;
  int eval_episodes = 200;
};

inline nlohmann::json run_deep(const DeepOptions& o, std::uint64_t seed, OutputDir& out) {
  deep::DeepConfig cfg;
  cfg.params = RationalityParams::uniform(o.beta_pl, o.beta_op, envs::kPongNumActions,
                                          envs::kPongNumActions);
  cfg.shape.hidden1 = o.hidden1;
  cfg.shape.hidden2 = o.hidden2;
  cfg.gamma = o.gamma;
  cfg.lr = o.lr;
  cfg.batch_size = o.batch;
  cfg.replay_capacity = o.replay;
  cfg.target_sync = o.target_sync;
  cfg.total_steps = o.steps;
  cfg.learning_starts = o.learning_starts;
  cfg.seed = seed;
  if (o.ticks < 1 || o.eval_episodes < 1) throw ConfigError("ticks and eval-episodes must be >= 1");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  envs::PongEnvConfig ec;
  ec.ticks_per_step = o.ticks;
  envs::PongEnv env(ec);
  const auto r = deep::train_deep(env, cfg);
  {
    auto f = out.open("episodes.csv");
    f << "episode,step,reward,mean_loss\n";
    for (const auto& row : r.episodes) {
      f << row.episode << ',' << row.step << ',' << row.reward << ',' << row.mean_loss << '\n';
    }
  }
  deep::NetworkCheckpointInfo info;
  info.seed = seed;
  info.step = r.steps;
  info.ticks_per_step = o.ticks;
  deep::save_network(out.path() / "network", r.params, info);
  out.record(out.path() / "network.json");
  out.record(out.path() / "network.bin");
  envs::PongEnv eval_env(ec);
  const double eval = deep::evaluate_deep(eval_env, r.params, cfg.params, o.eval_episodes,
                                          seed + 1000, cfg.max_episode_steps);
  return {{"steps", r.steps},
          {"updates", r.updates},
          {"episodes", r.episodes.size()},
          {"mean_recent_reward", r.mean_recent_reward(200)},
          {"eval_mean_reward", eval}};
}

// ------------------------------------------------------------------ sweep

struct SweepOptions {
  TrainOptions train;
  std::vector<double> beta_pl_grid{20.0};
  std::vector<double> beta_op_grid{-20, -15, -10, -5, 0, 5, 10, 15, 20};
  int workers = 0;  // 0 = hardware concurrency
};

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + '"';
}

inline nlohmann::json run_sweep(const SweepOptions& o, std::uint64_t seed, OutputDir& out) {
  if (o.beta_pl_grid.empty() || o.beta_op_grid.empty()) throw ConfigError("sweep grid is empty");
  if (o.workers < 0) throw ConfigError("workers must be >= 0");
  o.train.validate();
  struct Cell {
    double beta_pl, beta_op;
    std::optional<TrainOutcome> outcome;
    std::string error;
  };
  std::vector<Cell> cells;
  for (double p : o.beta_pl_grid) {
    for (double q : o.beta_op_grid) cells.push_back({p, q, std::nullopt, {}});
  }
  const fs::path cell_root = out.path() / "cells";
  fs::create_directories(cell_root);
  auto cell_name = [&](std::size_t i) {
    const std::size_t nq = o.beta_op_grid.size();
    return "pl" + std::to_string(i / nq) + "_op" + std::to_string(i % nq);
  };
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      auto& c = cells[i];
      try {
        TrainOptions t = o.train;
        t.beta = {c.beta_pl, c.beta_op};
        c.outcome = train_once(t, seed);
        std::ofstream f(cell_root / (cell_name(i) + ".csv"));
        f.precision(17);
        write_metrics_csv(f, c.outcome->result.metrics);
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  const std::size_t width = std::min<std::size_t>(
      cells.size(), o.workers > 0 ? static_cast<std::size_t>(o.workers)
                                  : std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < width; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::size_t failed = 0;
  {
    auto f = out.open("heatmap.csv");
    f << "beta_pl,beta_op,mean_reward,bellman_error,episodes_run,status\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      f << c.beta_pl << ',' << c.beta_op << ',';
      if (c.outcome) {
        f << c.outcome->eval.mean_reward << ',' << c.outcome->eval.bellman_error << ','
          << c.outcome->result.episodes_run << ",ok\n";
        out.record(cell_root / (cell_name(i) + ".csv"));
      } else {
        ++failed;
        f << ",,," << csv_quote(c.error) << '\n';
      }
    }
  }
  return {{"cells", cells.size()}, {"failed", failed}, {"workers", width}};
}

}  // namespace softgames::tools

#endif  // SOFTGAMES_TOOLS_COMMANDS_HPP_
