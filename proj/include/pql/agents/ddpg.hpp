#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pql/agents/critic.hpp"
#include "pql/agents/policy.hpp"
#include "pql/replay/nstep.hpp"

namespace pql::agents {

namespace detail {

template <typename T>
void check_finite(T v, const char* what) {
  if (!std::isfinite(static_cast<double>(v))) throw std::runtime_error(std::string(what) + ": non-finite");
}

}  // namespace detail

/// y = G + eff_disc * min(Q1', Q2')(s+, pi_lagged(s+)). The lagged policy is
/// the learner's local copy, hard-synced at snapshot receipt.
template <typename T>
std::vector<T> ddpg_critic_target(const replay::NStepBatch<T>& batch,
                                  const DeterministicPolicy<T>& lagged_policy,
                                  const CriticPair<T>& critics) {
  const std::size_t B = batch.size();
  Mat<T> next_act = lagged_policy.act(batch.boot_obs);
  Mat<T> xq = concat_cols(batch.boot_obs, next_act);
  Mat<T> q1 = fa::forward(critics.q1_target, xq);
  Mat<T> q2 = fa::forward(critics.q2_target, xq);
  std::vector<T> y(B);
  for (std::size_t b = 0; b < B; ++b) {
    const T qmin = std::min(q1(b, 0), q2(b, 0));
    y[b] = batch.ret[b] + batch.eff_disc[b] * qmin;
    detail::check_finite(y[b], "ddpg target");
  }
  return y;
}

template <typename T>
struct CriticLossResult {
  T loss = T(0);
  std::vector<T> dq1, dq2;  // parameter gradients, flat layout
};

/// Mean-squared Bellman error against the clipped double-Q target; the
/// target is a constant (no gradient flows through it).
template <typename T>
CriticLossResult<T> ddpg_critic_loss(const replay::NStepBatch<T>& batch,
                                     const DeterministicPolicy<T>& lagged_policy,
                                     const CriticPair<T>& critics) {
  const std::size_t B = batch.size();
  const std::vector<T> y = ddpg_critic_target(batch, lagged_policy, critics);
  Mat<T> xq = concat_cols(batch.obs, batch.act);
  fa::ForwardCache<T> c1, c2;
  Mat<T> q1 = fa::forward(critics.q1, xq, &c1);
  Mat<T> q2 = fa::forward(critics.q2, xq, &c2);

  CriticLossResult<T> out;
  Mat<T> up1(B, 1), up2(B, 1);
  T loss = T(0);
  for (std::size_t b = 0; b < B; ++b) {
    const T e1 = q1(b, 0) - y[b];
    const T e2 = q2(b, 0) - y[b];
    loss += e1 * e1 + e2 * e2;
    up1(b, 0) = T(2) * e1 / static_cast<T>(B);
    up2(b, 0) = T(2) * e2 / static_cast<T>(B);
  }
  out.loss = loss / static_cast<T>(B);
  detail::check_finite(out.loss, "ddpg critic loss");
  fa::backward(critics.q1, c1, up1, out.dq1);
  fa::backward(critics.q2, c2, up2, out.dq2);
  return out;
}

template <typename T>
struct ActorLossResult {
  T loss = T(0);
  std::vector<T> dpolicy;
};

/// loss = -mean_b min(Q1, Q2)(s, pi(s)); gradients flow through the policy
/// only, the critics stay frozen.
template <typename T>
ActorLossResult<T> ddpg_actor_loss(const Mat<T>& states, const DeterministicPolicy<T>& policy,
                                   const CriticPair<T>& critics) {
  const std::size_t B = states.rows();
  fa::ForwardCache<T> pc;
  Mat<T> act = policy.act(states, &pc);
  Mat<T> xq = concat_cols(states, act);
  fa::ForwardCache<T> c1, c2;
  Mat<T> q1 = fa::forward(critics.q1, xq, &c1);
  Mat<T> q2 = fa::forward(critics.q2, xq, &c2);

  ActorLossResult<T> out;
  Mat<T> up1(B, 1), up2(B, 1);
  T loss = T(0);
  for (std::size_t b = 0; b < B; ++b) {
    const bool pick1 = q1(b, 0) <= q2(b, 0);
    loss -= pick1 ? q1(b, 0) : q2(b, 0);
    up1(b, 0) = pick1 ? T(-1) / static_cast<T>(B) : T(0);
    up2(b, 0) = pick1 ? T(0) : T(-1) / static_cast<T>(B);
  }
  out.loss = loss / static_cast<T>(B);
  detail::check_finite(out.loss, "ddpg actor loss");

  Mat<T> din1 = fa::backward_input_only(critics.q1, c1, up1);
  Mat<T> din2 = fa::backward_input_only(critics.q2, c2, up2);
  const std::size_t obs_dim = states.cols(), act_dim = act.cols();
  Mat<T> dact(B, act_dim);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t d = 0; d < act_dim; ++d)
      dact(b, d) = din1(b, obs_dim + d) + din2(b, obs_dim + d);
  policy.backward(pc, dact, out.dpolicy);
  return out;
}

}  // namespace pql::agents
