#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "pql/agents/c51.hpp"
#include "pql/agents/critic.hpp"
#include "pql/agents/ddpg.hpp"
#include "pql/agents/policy.hpp"
#include "pql/agents/sac.hpp"
#include "pql/config.hpp"
#include "pql/explore/noise.hpp"
#include "pql/funcapprox/normalizer.hpp"
#include "pql/funcapprox/optim.hpp"
#include "pql/replay/nstep.hpp"
#include "pql/replay/replay_buffer.hpp"
#include "pql/runtime/messages.hpp"
#include "pql/vecenv/vecenv.hpp"

namespace pql::rt {

struct TaskDims {
  std::size_t obs_dim = 0, act_dim = 0;
  float low = -1.0f, high = 1.0f;
};

TaskDims task_dims(env::TaskId task);

/// Local policy replica; deterministic head for the DDPG-family, gaussian
/// head for the entropy-regularized variant.
struct PolicyHandle {
  bool stochastic = false;
  agents::DeterministicPolicy<float> det;
  agents::GaussianPolicy<float> gauss;
  float log_alpha = 0.0f;
  std::int64_t version = 0;

  static PolicyHandle create(const RunConfig& cfg, const TaskDims& dims,
                             std::mt19937_64& init_rng);

  const fa::Mlp<float>& net() const { return stochastic ? gauss.net : det.net; }
  fa::Mlp<float>& net() { return stochastic ? gauss.net : det.net; }

  void adopt(const PolicySnapshot& snap);
  PolicySnapshot snapshot(std::int64_t snap_version, const fa::NormStats& norm) const;
  MatF act_deterministic(const MatF& obs_norm) const;
};

/// Rollout machinery: batched envs, exploration noise, observation stats.
/// One step per call; the caller owns pacing and message plumbing.
class ActorCore {
 public:
  ActorCore(const RunConfig& cfg, const TaskDims& dims);

  void adopt_policy(const PolicySnapshot& snap);
  StepSlice rollout_step();

  const fa::NormStats& norm() const { return normalizer_.stats(); }
  const PolicyHandle& policy() const { return policy_; }
  std::int64_t policy_version() const { return policy_.version; }
  env::EnvBatch& envs() { return *env_; }

 private:
  RunConfig cfg_;
  TaskDims dims_;
  std::unique_ptr<env::EnvBatch> env_;
  MatF obs_;
  PolicyHandle policy_;
  fa::RunningNormalizer normalizer_;
  explore::NoiseSchedule schedule_;
  std::vector<env::SplitMixEngine> noise_rng_;
};

/// The value-learner numerical core: replay + n-step assembly, clipped
/// double-Q (scalar or categorical) updates, target maintenance.
class CriticLearnerCore {
 public:
  CriticLearnerCore(const RunConfig& cfg, const TaskDims& dims, std::mt19937_64 init_rng);

  void adopt_policy(const PolicySnapshot& snap);  // hard sync of the lagged policy
  void adopt_norm(const fa::NormStats& norm) { norm_ = norm; }
  void ingest(const StepSlice& slice);
  bool ready(std::int64_t c_a) const;
  float update();  // one critic update, returns loss
  CriticSnapshot make_snapshot(std::int64_t version) const;

  const agents::CriticPair<float>& critics() const { return critics_; }
  std::size_t buffer_size() const { return buffer_.size(); }
  std::int64_t lagged_policy_version() const { return lagged_.version; }

 private:
  RunConfig cfg_;
  TaskDims dims_;
  float reward_scale_;
  agents::CriticPair<float> critics_;
  fa::AdamState<float> adam_q1_, adam_q2_;
  PolicyHandle lagged_;
  fa::NormStats norm_;
  agents::CategoricalHead<float> head_;
  replay::NStepAssembler<float> assembler_;
  replay::ReplayBuffer buffer_;
  replay::NStepBatch<float> emitted_;
  std::vector<float> scaled_rew_;
  std::mt19937_64 sample_rng_, eps_rng_;
};

/// The policy-learner numerical core: state buffer, actor objective, and
/// (for the entropy variant) the temperature update.
class PolicyLearnerCore {
 public:
  PolicyLearnerCore(const RunConfig& cfg, const TaskDims& dims, std::mt19937_64 init_rng);

  void adopt_critics(const CriticSnapshot& snap);
  void adopt_critics_direct(const agents::CriticPair<float>& critics);  // synchronous path
  void adopt_norm(const fa::NormStats& norm) { norm_ = norm; }
  void ingest(const MatF& states) { state_buf_.insert(states); }
  bool ready(std::int64_t c_a) const;
  float update();  // one policy (+alpha) update, returns actor loss
  PolicySnapshot make_snapshot(std::int64_t version) const;

  const PolicyHandle& policy() const { return policy_; }
  std::size_t buffer_size() const { return state_buf_.size(); }

 private:
  RunConfig cfg_;
  TaskDims dims_;
  PolicyHandle policy_;
  fa::AdamState<float> adam_policy_;
  agents::CriticPair<float> critics_;  // online replicas; targets unused here
  std::int64_t critic_version_ = 0;
  agents::EntropyCoef<float> alpha_;
  std::vector<float> alpha_param_;
  fa::AdamState<float> adam_alpha_;
  agents::CategoricalHead<float> head_;
  fa::NormStats norm_;
  replay::StateBuffer state_buf_;
  std::mt19937_64 sample_rng_, eps_rng_;
};

/// Deterministic evaluation: a dedicated env batch of `episodes` rows, one
/// episode each, no exploration noise; returns raw undiscounted returns.
struct EvalResult {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t episodes = 0;
};

EvalResult evaluate_policy(const PolicySnapshot& snap, env::TaskId task, std::size_t episodes,
                           std::uint64_t eval_seed);

}  // namespace pql::rt
