#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "pql/agents/algo.hpp"
#include "pql/vecenv/vecenv.hpp"

namespace pql {

/// Full run configuration. Defaults are the benchmark hyperparameters;
/// anything can be overridden from a key=value config file or CLI flags
/// (flags win over the file, the file wins over defaults).
struct RunConfig {
  env::TaskId task = env::TaskId::pendulum;
  agents::Algo algo = agents::Algo::pql_ddpg;
  std::size_t n_envs = 4096;
  std::size_t batch_size = 8192;
  std::size_t buffer_capacity = 5'000'000;
  double gamma = 0.99;
  double tau = 0.05;
  std::size_t n_step = 3;
  double lr_actor = 5e-4;
  double lr_critic = 5e-4;
  std::int64_t warm_up = 32;
  double sigma_min = 0.05;
  double sigma_max = 0.8;
  double sigma_fixed = -1.0;  // >= 0: same sigma in every env (baseline sweeps)
  double beta_av = 1.0 / 8.0;
  double beta_pv = 1.0 / 2.0;
  bool free_running = false;
  double reward_scale = 0.0;  // 0: per-task default
  std::uint64_t seed = 0;
  double budget_s = 60.0;        // wall-clock budget
  std::int64_t budget_steps = 0;  // rollout steps per env; 0 = unlimited
  double eval_interval = 5.0;    // parallel: seconds; synchronous: rollout steps
  std::size_t eval_episodes = 32;
  double target_return = std::nan("");  // stop early once eval mean reaches this
  std::string out_dir;                  // empty: PQL_OUT_DIR or cwd
  std::string run_name;                 // artifact file stem; empty: derived
  bool plot = false;
  std::size_t horizon = 4;   // actor steps per send
  std::size_t k_pub = 8;     // learner updates per snapshot publish
  std::size_t hidden = 256;  // two hidden layers of this width
  std::size_t n_atoms = 51;
  double vmin = -10.0;
  double vmax = 10.0;

  double effective_reward_scale() const {
    return reward_scale > 0.0 ? reward_scale : env::default_reward_scale(task);
  }
  bool has_target() const { return !std::isnan(target_return); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

}  // namespace pql
