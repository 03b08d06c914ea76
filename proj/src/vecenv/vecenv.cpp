#include "pql/vecenv/vecenv.hpp"

#include <cmath>
#include <stdexcept>

namespace pql::env {

namespace {

constexpr float kPi = 3.14159265358979323846f;

float wrap_angle(float th) {
  // wrap to [-pi, pi]
  th = std::fmod(th + kPi, 2.0f * kPi);
  if (th < 0.0f) th += 2.0f * kPi;
  return th - kPi;
}

float uniform(SplitMixEngine& rng, float lo, float hi) {
  // 53-bit mantissa path keeps the draw independent of float rounding modes
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return static_cast<float>(lo + (hi - lo) * u);
}

}  // namespace

TaskId parse_task(const std::string& name) {
  if (name == "pendulum") return TaskId::pendulum;
  if (name == "cartpole_continuous") return TaskId::cartpole_continuous;
  if (name == "point_reacher") return TaskId::point_reacher;
  throw std::invalid_argument("unknown task: " + name);
}

std::string task_name(TaskId id) {
  switch (id) {
    case TaskId::pendulum: return "pendulum";
    case TaskId::cartpole_continuous: return "cartpole_continuous";
    case TaskId::point_reacher: return "point_reacher";
  }
  return "?";
}

float default_reward_scale(TaskId id) {
  // keeps discounted returns roughly inside the distributional support
  switch (id) {
    case TaskId::pendulum: return 0.01f;
    case TaskId::cartpole_continuous: return 0.1f;
    case TaskId::point_reacher: return 0.05f;
  }
  return 1.0f;
}

EnvBatch::EnvBatch(TaskId task, std::size_t n, std::uint64_t seed, std::size_t obs_dim,
                   std::size_t act_dim, float alow, float ahigh, std::size_t max_len, float dt)
    : task_(task),
      n_envs_(n),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      action_low_(alow),
      action_high_(ahigh),
      max_episode_len_(max_len),
      control_dt_(dt),
      episode_step_(n, 0),
      rng_(n) {
  if (n == 0) throw std::invalid_argument("make_env: n_envs must be >= 1");
  for (std::size_t i = 0; i < n; ++i) rng_[i].state = derive_seed(seed, RngStream::env, i);
  result_.next_observations.resize(n, obs_dim);
  result_.terminal_observations.resize(n, obs_dim);
  result_.rewards.assign(n, 0.0f);
  result_.dones.assign(n, 0);
  result_.truncated.assign(n, 0);
}

MatF EnvBatch::reset_all() {
  MatF obs(n_envs_, obs_dim_);
  for (std::size_t i = 0; i < n_envs_; ++i) {
    reset_row(i);
    episode_step_[i] = 0;
    observe_row(i, obs.row(i));
  }
  return obs;
}

const StepResult& EnvBatch::step(const MatF& actions) {
  if (actions.rows() != n_envs_ || actions.cols() != act_dim_)
    throw std::invalid_argument("step: action shape mismatch");
  for (std::size_t k = 0; k < actions.size(); ++k)
    if (!std::isfinite(actions.data()[k]))
      throw std::runtime_error("step: non-finite action (upstream divergence)");
  for (std::size_t i = 0; i < n_envs_; ++i) {
    float reward = 0.0f;
    const bool terminal = step_row(i, actions.row(i), reward);
    episode_step_[i] += 1;
    const bool timeout = episode_step_[i] >= static_cast<std::int64_t>(max_episode_len_);
    result_.rewards[i] = reward;
    result_.dones[i] = terminal || timeout;
    result_.truncated[i] = (!terminal && timeout);
    if (result_.dones[i]) {
      observe_row(i, result_.terminal_observations.row(i));
      reset_row(i);
      episode_step_[i] = 0;
    }
    observe_row(i, result_.next_observations.row(i));
  }
  return result_;
}

// ---------------------------------------------------------------------------
// Pendulum swing-up: state (theta, theta_dot), torque in [-2, 2],
// reward -(wrap(theta)^2 + 0.1*theta_dot^2 + 0.001*u^2), dt = 0.05,
// episodes of 200 steps (time-limit only).
// ---------------------------------------------------------------------------

class PendulumBatch final : public EnvBatch {
 public:
  PendulumBatch(std::size_t n, std::uint64_t seed)
      : EnvBatch(TaskId::pendulum, n, seed, 3, 1, -2.0f, 2.0f, 200, kDt), th_(n), thdot_(n) {}

 private:
  static constexpr float kDt = 0.05f;
  static constexpr float kG = 10.0f;
  static constexpr float kMass = 1.0f;
  static constexpr float kLen = 1.0f;
  static constexpr float kMaxSpeed = 8.0f;

  void reset_row(std::size_t i) override {
    th_[i] = uniform(rng(i), -kPi, kPi);
    thdot_[i] = uniform(rng(i), -1.0f, 1.0f);
  }

  bool step_row(std::size_t i, const float* action, float& reward) override {
    float u = action[0];
    u = u < action_low_ ? action_low_ : (u > action_high_ ? action_high_ : u);
    const float th = th_[i];
    const float thdot = thdot_[i];
    const float thw = wrap_angle(th);
    reward = -(thw * thw + 0.1f * thdot * thdot + 0.001f * u * u);
    // semi-implicit Euler
    float newthdot =
        thdot + kDt * (3.0f * kG / (2.0f * kLen) * std::sin(th) +
                       3.0f / (kMass * kLen * kLen) * u);
    newthdot = newthdot < -kMaxSpeed ? -kMaxSpeed : (newthdot > kMaxSpeed ? kMaxSpeed : newthdot);
    th_[i] = th + kDt * newthdot;
    thdot_[i] = newthdot;
    return false;  // time-limit only
  }

  void observe_row(std::size_t i, float* obs) const override {
    obs[0] = std::cos(th_[i]);
    obs[1] = std::sin(th_[i]);
    obs[2] = thdot_[i];
  }

  std::vector<float> th_, thdot_;
};

// ---------------------------------------------------------------------------
// Continuous-force cart-pole: obs (x, x_dot, theta, theta_dot), force in
// [-10, 10], reward +1 alive - 0.01*|u|, fails on |x| > 2.4 or |theta| > 12deg.
// ---------------------------------------------------------------------------

class CartpoleBatch final : public EnvBatch {
 public:
  CartpoleBatch(std::size_t n, std::uint64_t seed)
      : EnvBatch(TaskId::cartpole_continuous, n, seed, 4, 1, -10.0f, 10.0f, 500, kDt),
        x_(n), xdot_(n), th_(n), thdot_(n) {}

 private:
  static constexpr float kDt = 0.02f;
  static constexpr float kG = 9.8f;
  static constexpr float kMassCart = 1.0f;
  static constexpr float kMassPole = 0.1f;
  static constexpr float kTotalMass = kMassCart + kMassPole;
  static constexpr float kHalfPole = 0.5f;
  static constexpr float kPoleMassLen = kMassPole * kHalfPole;
  static constexpr float kXLimit = 2.4f;
  static constexpr float kThetaLimit = 12.0f * kPi / 180.0f;

  void reset_row(std::size_t i) override {
    x_[i] = uniform(rng(i), -0.05f, 0.05f);
    xdot_[i] = uniform(rng(i), -0.05f, 0.05f);
    th_[i] = uniform(rng(i), -0.05f, 0.05f);
    thdot_[i] = uniform(rng(i), -0.05f, 0.05f);
  }

  bool step_row(std::size_t i, const float* action, float& reward) override {
    float u = action[0];
    u = u < action_low_ ? action_low_ : (u > action_high_ ? action_high_ : u);
    const float costh = std::cos(th_[i]);
    const float sinth = std::sin(th_[i]);
    const float temp = (u + kPoleMassLen * thdot_[i] * thdot_[i] * sinth) / kTotalMass;
    const float thacc = (kG * sinth - costh * temp) /
                        (kHalfPole * (4.0f / 3.0f - kMassPole * costh * costh / kTotalMass));
    const float xacc = temp - kPoleMassLen * thacc * costh / kTotalMass;
    xdot_[i] += kDt * xacc;
    x_[i] += kDt * xdot_[i];
    thdot_[i] += kDt * thacc;
    th_[i] += kDt * thdot_[i];
    reward = 1.0f - 0.01f * std::fabs(u);
    return std::fabs(x_[i]) > kXLimit || std::fabs(th_[i]) > kThetaLimit;
  }

  void observe_row(std::size_t i, float* obs) const override {
    obs[0] = x_[i];
    obs[1] = xdot_[i];
    obs[2] = th_[i];
    obs[3] = thdot_[i];
  }

  std::vector<float> x_, xdot_, th_, thdot_;
};

// ---------------------------------------------------------------------------
// Point reacher: 2-D point driven by a velocity command toward a random
// goal, reward -||p-goal||, success inside 0.05.
// ---------------------------------------------------------------------------

class ReacherBatch final : public EnvBatch {
 public:
  ReacherBatch(std::size_t n, std::uint64_t seed)
      : EnvBatch(TaskId::point_reacher, n, seed, 4, 2, -1.0f, 1.0f, 100, kDt), p_(n, 2), goal_(n, 2) {}

 private:
  static constexpr float kDt = 0.05f;
  static constexpr float kBound = 1.5f;
  static constexpr float kSuccessDist = 0.05f;

  void reset_row(std::size_t i) override {
    p_(i, 0) = uniform(rng(i), -1.0f, 1.0f);
    p_(i, 1) = uniform(rng(i), -1.0f, 1.0f);
    goal_(i, 0) = uniform(rng(i), -1.0f, 1.0f);
    goal_(i, 1) = uniform(rng(i), -1.0f, 1.0f);
  }

  bool step_row(std::size_t i, const float* action, float& reward) override {
    for (int d = 0; d < 2; ++d) {
      float u = action[d];
      u = u < action_low_ ? action_low_ : (u > action_high_ ? action_high_ : u);
      float p = p_(i, d) + kDt * u;
      p = p < -kBound ? -kBound : (p > kBound ? kBound : p);
      p_(i, d) = p;
    }
    const float dx = p_(i, 0) - goal_(i, 0);
    const float dy = p_(i, 1) - goal_(i, 1);
    const float dist = std::sqrt(dx * dx + dy * dy);
    reward = -dist;
    return dist < kSuccessDist;
  }

  void observe_row(std::size_t i, float* obs) const override {
    obs[0] = p_(i, 0);
    obs[1] = p_(i, 1);
    obs[2] = goal_(i, 0) - p_(i, 0);
    obs[3] = goal_(i, 1) - p_(i, 1);
  }

  MatF p_, goal_;
};

std::unique_ptr<EnvBatch> make_env(TaskId task, std::size_t n_envs, std::uint64_t seed) {
  std::unique_ptr<EnvBatch> env;
  switch (task) {
    case TaskId::pendulum: env = std::make_unique<PendulumBatch>(n_envs, seed); break;
    case TaskId::cartpole_continuous: env = std::make_unique<CartpoleBatch>(n_envs, seed); break;
    case TaskId::point_reacher: env = std::make_unique<ReacherBatch>(n_envs, seed); break;
  }
  env->reset_all();
  return env;
}

}  // namespace pql::env
