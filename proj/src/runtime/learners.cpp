#include "pql/runtime/learners.hpp"

#include <cmath>
#include <stdexcept>

namespace pql::rt {

TaskDims task_dims(env::TaskId task) {
  const auto probe = env::make_env(task, 1, 0);
  return TaskDims{probe->obs_dim(), probe->act_dim(), probe->action_low(), probe->action_high()};
}

// ---------------------------------------------------------------------------
// PolicyHandle
// ---------------------------------------------------------------------------

PolicyHandle PolicyHandle::create(const RunConfig& cfg, const TaskDims& dims,
                                  std::mt19937_64& init_rng) {
  PolicyHandle p;
  p.stochastic = agents::is_sac(cfg.algo);
  const std::size_t out = p.stochastic ? 2 * dims.act_dim : dims.act_dim;
  auto net = fa::Mlp<float>::zeros({dims.obs_dim, cfg.hidden, cfg.hidden, out},
                                   {fa::Act::relu, fa::Act::relu, fa::Act::identity});
  fa::init_orthogonal(net, init_rng, float(std::sqrt(2.0)), 1e-2f);
  if (p.stochastic) {
    p.gauss.net = std::move(net);
    p.gauss.low = dims.low;
    p.gauss.high = dims.high;
  } else {
    p.det.net = std::move(net);
    p.det.low = dims.low;
    p.det.high = dims.high;
  }
  return p;
}

void PolicyHandle::adopt(const PolicySnapshot& snap) {
  if (snap.version < version) return;  // only equal-or-newer replaces
  net().flat = snap.net.flat;
  log_alpha = snap.log_alpha;
  version = snap.version;
}

PolicySnapshot PolicyHandle::snapshot(std::int64_t snap_version, const fa::NormStats& norm) const {
  PolicySnapshot s;
  s.version = snap_version;
  s.net = net();
  s.stochastic = stochastic;
  s.log_alpha = log_alpha;
  s.norm = norm;
  return s;
}

MatF PolicyHandle::act_deterministic(const MatF& obs_norm) const {
  return stochastic ? gauss.mean_act(obs_norm) : det.act(obs_norm);
}

// ---------------------------------------------------------------------------
// ActorCore
// ---------------------------------------------------------------------------

ActorCore::ActorCore(const RunConfig& cfg, const TaskDims& dims)
    : cfg_(cfg),
      dims_(dims),
      env_(env::make_env(cfg.task, cfg.n_envs, cfg.seed)),
      normalizer_(dims.obs_dim),
      noise_rng_(cfg.n_envs) {
  obs_ = env_->reset_all();
  auto init_rng = make_rng(cfg.seed, RngStream::init, 0);
  policy_ = PolicyHandle::create(cfg, dims, init_rng);
  schedule_ = cfg.sigma_fixed >= 0.0
                  ? explore::build_fixed_schedule(float(cfg.sigma_fixed), cfg.n_envs)
                  : explore::build_schedule(float(cfg.sigma_min), float(cfg.sigma_max), cfg.n_envs);
  for (std::size_t i = 0; i < cfg.n_envs; ++i)
    noise_rng_[i].state = derive_seed(cfg.seed, RngStream::noise, i);
}

void ActorCore::adopt_policy(const PolicySnapshot& snap) { policy_.adopt(snap); }

StepSlice ActorCore::rollout_step() {
  const std::size_t N = cfg_.n_envs;
  StepSlice slice;
  slice.obs = obs_;

  MatF obs_norm = normalizer_.apply(obs_);
  MatF actions;
  if (policy_.stochastic) {
    // exploration comes from the policy distribution itself
    MatF eps(N, dims_.act_dim);
    for (std::size_t i = 0; i < N; ++i) {
      std::normal_distribution<float> gauss(0.0f, 1.0f);
      for (std::size_t d = 0; d < dims_.act_dim; ++d) eps(i, d) = gauss(noise_rng_[i]);
    }
    actions = policy_.gauss.sample(obs_norm, eps).act;
  } else {
    actions = policy_.det.act(obs_norm);
    explore::apply_noise(actions, schedule_, dims_.low, dims_.high, noise_rng_);
  }
  slice.act = actions;

  const auto& res = env_->step(actions);
  slice.rew = res.rewards;
  slice.term.resize(N);
  slice.trunc = res.truncated;
  slice.boot_obs.resize(N, dims_.obs_dim);
  for (std::size_t i = 0; i < N; ++i) {
    slice.term[i] = res.dones[i] && !res.truncated[i];
    const float* boot = res.dones[i] ? res.terminal_observations.row(i)
                                     : res.next_observations.row(i);
    std::copy(boot, boot + dims_.obs_dim, slice.boot_obs.row(i));
  }

  normalizer_.update(obs_);
  obs_ = res.next_observations;
  return slice;
}

// ---------------------------------------------------------------------------
// CriticLearnerCore
// ---------------------------------------------------------------------------

CriticLearnerCore::CriticLearnerCore(const RunConfig& cfg, const TaskDims& dims,
                                     std::mt19937_64 init_rng)
    : cfg_(cfg),
      dims_(dims),
      reward_scale_(float(cfg.effective_reward_scale())),
      critics_(agents::CriticPair<float>::create(
          {dims.obs_dim + dims.act_dim, cfg.hidden, cfg.hidden,
           agents::is_distributional(cfg.algo) ? cfg.n_atoms : 1},
          {fa::Act::relu, fa::Act::relu, fa::Act::identity}, init_rng)),
      adam_q1_(critics_.q1.param_count()),
      adam_q2_(critics_.q2.param_count()),
      head_(agents::CategoricalHead<float>::create(cfg.n_atoms, float(cfg.vmin), float(cfg.vmax))),
      assembler_(cfg.n_envs, dims.obs_dim, dims.act_dim, float(cfg.gamma), cfg.n_step),
      buffer_(cfg.buffer_capacity, dims.obs_dim, dims.act_dim),
      sample_rng_(make_rng(cfg.seed, RngStream::sample, 1)),
      eps_rng_(make_rng(cfg.seed, RngStream::sac, 1)) {
  auto policy_rng = make_rng(cfg.seed, RngStream::init, 0);
  lagged_ = PolicyHandle::create(cfg, dims, policy_rng);
}

void CriticLearnerCore::adopt_policy(const PolicySnapshot& snap) { lagged_.adopt(snap); }

void CriticLearnerCore::ingest(const StepSlice& slice) {
  scaled_rew_.assign(slice.rew.begin(), slice.rew.end());
  for (auto& r : scaled_rew_) r *= reward_scale_;
  emitted_.clear();
  assembler_.push_step(slice.obs, slice.act, scaled_rew_, slice.term, slice.trunc, slice.boot_obs,
                       emitted_);
  buffer_.insert(emitted_);
}

bool CriticLearnerCore::ready(std::int64_t c_a) const {
  return c_a >= cfg_.warm_up && buffer_.size() >= cfg_.batch_size;
}

float CriticLearnerCore::update() {
  auto sampled = buffer_.sample(cfg_.batch_size, sample_rng_, cfg_.batch_size);
  if (!sampled) throw std::runtime_error("critic update before buffer warm-up");
  replay::NStepBatch<float>& batch = *sampled;
  batch.obs = fa::RunningNormalizer::apply_stats(norm_, batch.obs);
  batch.boot_obs = fa::RunningNormalizer::apply_stats(norm_, batch.boot_obs);

  agents::CriticLossResult<float> res;
  switch (cfg_.algo) {
    case agents::Algo::pql_d:
      res = agents::c51_critic_loss(batch, lagged_.det, critics_, head_);
      break;
    case agents::Algo::pql_sac:
    case agents::Algo::sync_sac_n: {
      MatF eps(batch.size(), dims_.act_dim);
      std::normal_distribution<float> gauss(0.0f, 1.0f);
      for (std::size_t k = 0; k < eps.size(); ++k) eps.data()[k] = gauss(eps_rng_);
      res = agents::sac_critic_loss(batch, lagged_.gauss, critics_,
                                    std::exp(lagged_.log_alpha), eps);
      break;
    }
    default:
      res = agents::ddpg_critic_loss(batch, lagged_.det, critics_);
      break;
  }
  fa::clip_global_norm(res.dq1, 0.5f);
  fa::clip_global_norm(res.dq2, 0.5f);
  fa::adam_step(critics_.q1.flat, res.dq1, adam_q1_, float(cfg_.lr_critic));
  fa::adam_step(critics_.q2.flat, res.dq2, adam_q2_, float(cfg_.lr_critic));
  critics_.soft_update_targets(float(cfg_.tau));
  return res.loss;
}

CriticSnapshot CriticLearnerCore::make_snapshot(std::int64_t version) const {
  CriticSnapshot s;
  s.version = version;
  s.q1 = critics_.q1;
  s.q2 = critics_.q2;
  return s;
}

// ---------------------------------------------------------------------------
// PolicyLearnerCore
// ---------------------------------------------------------------------------

PolicyLearnerCore::PolicyLearnerCore(const RunConfig& cfg, const TaskDims& dims,
                                     std::mt19937_64 init_rng)
    : cfg_(cfg),
      dims_(dims),
      critics_(agents::CriticPair<float>::create(
          {dims.obs_dim + dims.act_dim, cfg.hidden, cfg.hidden,
           agents::is_distributional(cfg.algo) ? cfg.n_atoms : 1},
          {fa::Act::relu, fa::Act::relu, fa::Act::identity}, init_rng)),
      head_(agents::CategoricalHead<float>::create(cfg.n_atoms, float(cfg.vmin), float(cfg.vmax))),
      state_buf_(cfg.buffer_capacity, dims.obs_dim),
      sample_rng_(make_rng(cfg.seed, RngStream::sample, 2)),
      eps_rng_(make_rng(cfg.seed, RngStream::sac, 2)) {
  auto policy_rng = make_rng(cfg.seed, RngStream::init, 0);
  policy_ = PolicyHandle::create(cfg, dims, policy_rng);
  adam_policy_ = fa::AdamState<float>(policy_.net().param_count());
  alpha_.target_entropy = -float(dims.act_dim);
  alpha_param_.assign(1, 0.0f);  // log alpha
  adam_alpha_ = fa::AdamState<float>(1);
}

void PolicyLearnerCore::adopt_critics(const CriticSnapshot& snap) {
  if (snap.version < critic_version_) return;
  critics_.q1.flat = snap.q1.flat;
  critics_.q2.flat = snap.q2.flat;
  critic_version_ = snap.version;
}

void PolicyLearnerCore::adopt_critics_direct(const agents::CriticPair<float>& critics) {
  critics_.q1.flat = critics.q1.flat;
  critics_.q2.flat = critics.q2.flat;
  critic_version_ += 1;
}

bool PolicyLearnerCore::ready(std::int64_t c_a) const {
  return c_a >= cfg_.warm_up && state_buf_.size() >= cfg_.batch_size;
}

float PolicyLearnerCore::update() {
  auto sampled = state_buf_.sample(cfg_.batch_size, sample_rng_, cfg_.batch_size);
  if (!sampled) throw std::runtime_error("policy update before state warm-up");
  MatF states = fa::RunningNormalizer::apply_stats(norm_, *sampled);

  float loss = 0.0f;
  std::vector<float> dpolicy;
  if (agents::is_sac(cfg_.algo)) {
    MatF eps(states.rows(), dims_.act_dim);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    for (std::size_t k = 0; k < eps.size(); ++k) eps.data()[k] = gauss(eps_rng_);
    alpha_.log_alpha = alpha_param_[0];
    auto res = agents::sac_actor_loss(states, policy_.gauss, critics_, alpha_.alpha(), eps);
    loss = res.loss;
    dpolicy = std::move(res.dpolicy);
    auto ares = agents::sac_alpha_loss(res.mean_logp, alpha_);
    std::vector<float> dalpha{ares.dlog_alpha};
    fa::adam_step(alpha_param_, dalpha, adam_alpha_, float(cfg_.lr_actor));
    policy_.log_alpha = alpha_param_[0];
  } else if (agents::is_distributional(cfg_.algo)) {
    auto res = agents::c51_actor_loss(states, policy_.det, critics_, head_);
    loss = res.loss;
    dpolicy = std::move(res.dpolicy);
  } else {
    auto res = agents::ddpg_actor_loss(states, policy_.det, critics_);
    loss = res.loss;
    dpolicy = std::move(res.dpolicy);
  }
  fa::clip_global_norm(dpolicy, 0.5f);
  fa::adam_step(policy_.net().flat, dpolicy, adam_policy_, float(cfg_.lr_actor));
  return loss;
}

PolicySnapshot PolicyLearnerCore::make_snapshot(std::int64_t version) const {
  return policy_.snapshot(version, norm_);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvalResult evaluate_policy(const PolicySnapshot& snap, env::TaskId task, std::size_t episodes,
                           std::uint64_t eval_seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  auto env = env::make_env(task, episodes, eval_seed);
  const std::size_t D = env->obs_dim();

  agents::DeterministicPolicy<float> det;
  agents::GaussianPolicy<float> gauss;
  if (snap.stochastic) {
    gauss.net = snap.net;
    gauss.low = env->action_low();
    gauss.high = env->action_high();
  } else {
    det.net = snap.net;
    det.low = env->action_low();
    det.high = env->action_high();
  }

  MatF obs = env->reset_all();
  std::vector<double> ret(episodes, 0.0);
  std::vector<std::uint8_t> finished(episodes, 0);
  std::size_t remaining = episodes;
  for (std::size_t step = 0; step < env->max_episode_len() && remaining > 0; ++step) {
    MatF obs_norm = fa::RunningNormalizer::apply_stats(snap.norm, obs);
    MatF act = snap.stochastic ? gauss.mean_act(obs_norm) : det.act(obs_norm);
    const auto& res = env->step(act);
    for (std::size_t i = 0; i < episodes; ++i) {
      if (finished[i]) continue;
      ret[i] += res.rewards[i];
      if (res.dones[i]) {
        finished[i] = 1;
        --remaining;
      }
    }
    obs = res.next_observations;
    (void)D;
  }

  double mean = 0.0;
  for (double r : ret) mean += r;
  mean /= double(episodes);
  double var = 0.0;
  for (double r : ret) var += (r - mean) * (r - mean);
  var = episodes > 1 ? var / double(episodes - 1) : 0.0;
  return EvalResult{mean, std::sqrt(var / double(episodes)), episodes};
}

}  // namespace pql::rt
