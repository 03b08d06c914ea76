#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pql/agents/critic.hpp"
#include "pql/agents/ddpg.hpp"
#include "pql/agents/policy.hpp"
#include "pql/replay/nstep.hpp"

namespace pql::agents {

/// Learnable temperature, kept positive through the log parameterization.
template <typename T>
struct EntropyCoef {
  T log_alpha = T(0);
  T target_entropy = T(0);  // usually -act_dim

  T alpha() const { return std::exp(log_alpha); }
};

/// y = G + eff * (min Q'(s+, a') - alpha * log pi(a'|s+)), a' reparameterized
/// from the learner's local policy. Entropy enters at the bootstrap state
/// only; intermediate n-step rewards carry no bonus.
template <typename T>
CriticLossResult<T> sac_critic_loss(const replay::NStepBatch<T>& batch,
                                    const GaussianPolicy<T>& policy, const CriticPair<T>& critics,
                                    T alpha, const Mat<T>& eps_next) {
  const std::size_t B = batch.size();
  auto next = policy.sample(batch.boot_obs, eps_next);
  Mat<T> xq_next = concat_cols(batch.boot_obs, next.act);
  Mat<T> q1n = fa::forward(critics.q1_target, xq_next);
  Mat<T> q2n = fa::forward(critics.q2_target, xq_next);

  std::vector<T> y(B);
  for (std::size_t b = 0; b < B; ++b) {
    const T qmin = std::min(q1n(b, 0), q2n(b, 0));
    y[b] = batch.ret[b] + batch.eff_disc[b] * (qmin - alpha * next.logp[b]);
    detail::check_finite(y[b], "sac target");
  }

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
  detail::check_finite(out.loss, "sac critic loss");
  fa::backward(critics.q1, c1, up1, out.dq1);
  fa::backward(critics.q2, c2, up2, out.dq2);
  return out;
}

template <typename T>
struct SacActorResult {
  T loss = T(0);
  std::vector<T> dpolicy;
  T mean_logp = T(0);  // detached, feeds the alpha update
};

/// loss = mean(alpha * log pi(a|s) - min Q(s, a)), a reparameterized.
template <typename T>
SacActorResult<T> sac_actor_loss(const Mat<T>& states, const GaussianPolicy<T>& policy,
                                 const CriticPair<T>& critics, T alpha, const Mat<T>& eps) {
  const std::size_t B = states.rows();
  auto s = policy.sample(states, eps);
  Mat<T> xq = concat_cols(states, s.act);
  fa::ForwardCache<T> c1, c2;
  Mat<T> q1 = fa::forward(critics.q1, xq, &c1);
  Mat<T> q2 = fa::forward(critics.q2, xq, &c2);

  SacActorResult<T> out;
  Mat<T> up1(B, 1), up2(B, 1);
  std::vector<T> dlogp(B);
  T loss = T(0), sum_logp = T(0);
  for (std::size_t b = 0; b < B; ++b) {
    const bool pick1 = q1(b, 0) <= q2(b, 0);
    loss += alpha * s.logp[b] - (pick1 ? q1(b, 0) : q2(b, 0));
    sum_logp += s.logp[b];
    up1(b, 0) = pick1 ? T(-1) / static_cast<T>(B) : T(0);
    up2(b, 0) = pick1 ? T(0) : T(-1) / static_cast<T>(B);
    dlogp[b] = alpha / static_cast<T>(B);
  }
  out.loss = loss / static_cast<T>(B);
  out.mean_logp = sum_logp / static_cast<T>(B);
  detail::check_finite(out.loss, "sac actor loss");

  Mat<T> din1 = fa::backward_input_only(critics.q1, c1, up1);
  Mat<T> din2 = fa::backward_input_only(critics.q2, c2, up2);
  const std::size_t obs_dim = states.cols(), act_dim = s.act.cols();
  Mat<T> dact(B, act_dim);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t d = 0; d < act_dim; ++d)
      dact(b, d) = din1(b, obs_dim + d) + din2(b, obs_dim + d);
  policy.backward(s, dact, dlogp, out.dpolicy);
  return out;
}

template <typename T>
struct AlphaLossResult {
  T loss = T(0);
  T dlog_alpha = T(0);
};

/// loss = -mean(log_alpha * (log pi + H*)); log pi is detached.
template <typename T>
AlphaLossResult<T> sac_alpha_loss(T mean_logp, const EntropyCoef<T>& coef) {
  AlphaLossResult<T> out;
  const T drift = mean_logp + coef.target_entropy;
  out.loss = -coef.log_alpha * drift;
  out.dlog_alpha = -drift;
  detail::check_finite(out.loss, "alpha loss");
  return out;
}

template <typename T>
struct SacLosses {
  CriticLossResult<T> critic;
  SacActorResult<T> actor;
  AlphaLossResult<T> alpha;
};

/// Convenience bundle running all three updates on one batch (the
/// synchronous baseline path; the parallel scheme splits them across
/// learners).
template <typename T>
SacLosses<T> sac_losses(const replay::NStepBatch<T>& batch, const GaussianPolicy<T>& policy,
                        const CriticPair<T>& critics, const EntropyCoef<T>& coef,
                        const Mat<T>& eps_next, const Mat<T>& eps_cur) {
  SacLosses<T> out;
  out.critic = sac_critic_loss(batch, policy, critics, coef.alpha(), eps_next);
  out.actor = sac_actor_loss(batch.obs, policy, critics, coef.alpha(), eps_cur);
  out.alpha = sac_alpha_loss(out.actor.mean_logp, coef);
  return out;
}

}  // namespace pql::agents
