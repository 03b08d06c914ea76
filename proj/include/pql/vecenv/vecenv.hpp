#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pql/mat.hpp"
#include "pql/rng.hpp"

namespace pql::env {

enum class TaskId { pendulum, cartpole_continuous, point_reacher };

TaskId parse_task(const std::string& name);
std::string task_name(TaskId id);
float default_reward_scale(TaskId id);

/// One batched step. Rows with dones set have already been reset in place:
/// next_observations holds the fresh-episode observation, while the
/// observation that actually ended the episode is kept in
/// terminal_observations for bootstrapping.
struct StepResult {
  MatF next_observations;
  MatF terminal_observations;  // row i valid iff dones[i]
  std::vector<float> rewards;  // task units, pre-scaling
  std::vector<std::uint8_t> dones;
  std::vector<std::uint8_t> truncated;  // time-limit subset of dones
};

/// Tiny keyed counter generator; 8 bytes per environment keeps per-env
/// streams cheap at N in the thousands. Satisfies UniformRandomBitGenerator.
struct SplitMixEngine {
  using result_type = std::uint64_t;
  std::uint64_t state = 0;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()() { return splitmix64(state++); }
};

/// Batch of N identical environments stepped in lockstep with auto-reset.
/// Each row owns a deterministic stream keyed by (seed, env index), so
/// stepping a batch of K envs is bit-identical to stepping K singletons.
class EnvBatch {
 public:
  virtual ~EnvBatch() = default;

  TaskId task() const { return task_; }
  std::size_t n_envs() const { return n_envs_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  float action_low() const { return action_low_; }
  float action_high() const { return action_high_; }
  std::size_t max_episode_len() const { return max_episode_len_; }
  float control_dt() const { return control_dt_; }
  const std::vector<std::int64_t>& episode_step() const { return episode_step_; }

  MatF reset_all();
  const StepResult& step(const MatF& actions);

 protected:
  EnvBatch(TaskId task, std::size_t n, std::uint64_t seed, std::size_t obs_dim,
           std::size_t act_dim, float alow, float ahigh, std::size_t max_len, float dt);

  virtual void reset_row(std::size_t i) = 0;
  // integrates row i and fills reward; returns true when the task reached a
  // terminal (failure/success) state this step
  virtual bool step_row(std::size_t i, const float* action, float& reward) = 0;
  virtual void observe_row(std::size_t i, float* obs) const = 0;

  SplitMixEngine& rng(std::size_t i) { return rng_[i]; }

  TaskId task_;
  std::size_t n_envs_, obs_dim_, act_dim_;
  float action_low_, action_high_;
  std::size_t max_episode_len_;
  float control_dt_;
  std::vector<std::int64_t> episode_step_;
  std::vector<SplitMixEngine> rng_;
  StepResult result_;
};

std::unique_ptr<EnvBatch> make_env(TaskId task, std::size_t n_envs, std::uint64_t seed);

}  // namespace pql::env
