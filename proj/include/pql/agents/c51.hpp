#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pql/agents/critic.hpp"
#include "pql/agents/ddpg.hpp"
#include "pql/agents/policy.hpp"
#include "pql/replay/nstep.hpp"

namespace pql::agents {

/// Fixed atom support for the categorical critic.
template <typename T>
struct CategoricalHead {
  std::size_t n_atoms = 51;
  T vmin = T(-10), vmax = T(10);
  std::vector<T> atoms;

  static CategoricalHead create(std::size_t n_atoms = 51, T vmin = T(-10), T vmax = T(10)) {
    if (n_atoms < 2 || !(vmin < vmax)) throw std::invalid_argument("categorical head: bad support");
    CategoricalHead h;
    h.n_atoms = n_atoms;
    h.vmin = vmin;
    h.vmax = vmax;
    h.atoms.resize(n_atoms);
    const double dz = (static_cast<double>(vmax) - vmin) / static_cast<double>(n_atoms - 1);
    for (std::size_t j = 0; j < n_atoms; ++j)
      h.atoms[j] = static_cast<T>(static_cast<double>(vmin) + dz * static_cast<double>(j));
    h.atoms.front() = vmin;
    h.atoms.back() = vmax;
    return h;
  }

  double delta_z() const {
    return (static_cast<double>(vmax) - vmin) / static_cast<double>(n_atoms - 1);
  }
};

namespace detail {

template <typename T>
void softmax_row(const T* logits, T* probs, std::size_t n) {
  T mx = logits[0];
  for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, logits[j]);
  T sum = T(0);
  for (std::size_t j = 0; j < n; ++j) {
    probs[j] = std::exp(logits[j] - mx);
    sum += probs[j];
  }
  for (std::size_t j = 0; j < n; ++j) probs[j] /= sum;
}

}  // namespace detail

/// Projects the Bellman-shifted distribution back onto the atom grid:
/// Tz_j = clamp(G + eff*z_j, vmin, vmax), mass split between the two
/// neighbouring atoms of Tz_j proportionally to distance. A grid index
/// within 1e-5 of an integer counts as integral and keeps its mass whole,
/// which makes the no-shift case (G=0, eff=1) an exact identity.
template <typename T>
Mat<T> c51_project(const Mat<T>& target_probs, std::span<const T> ret, std::span<const T> eff_disc,
                   const CategoricalHead<T>& head) {
  const std::size_t B = target_probs.rows(), L = head.n_atoms;
  if (target_probs.cols() != L || ret.size() != B || eff_disc.size() != B)
    throw std::invalid_argument("c51_project: shape mismatch");
  const double vmin = head.vmin, vmax = head.vmax;
  const double dz = head.delta_z();
  Mat<T> out(B, L);
  for (std::size_t b = 0; b < B; ++b) {
    const T* p = target_probs.row(b);
    double mass = 0.0;
    for (std::size_t j = 0; j < L; ++j) mass += static_cast<double>(p[j]);
    if (std::fabs(mass - 1.0) > 1e-5)
      throw std::runtime_error("c51_project: input row not normalized");
    T* q = out.row(b);
    const double g = static_cast<double>(ret[b]);
    const double e = static_cast<double>(eff_disc[b]);
    for (std::size_t j = 0; j < L; ++j) {
      double tz = g + e * static_cast<double>(head.atoms[j]);
      if (tz < vmin) tz = vmin;
      if (tz > vmax) tz = vmax;
      double pos = (tz - vmin) / dz;
      const double snapped = std::nearbyint(pos);
      if (std::fabs(pos - snapped) < 1e-5) pos = snapped;
      const auto lo = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(lo);
      if (frac == 0.0) {
        q[lo] += p[j];
      } else {
        q[lo] += static_cast<T>(static_cast<double>(p[j]) * (1.0 - frac));
        q[lo + 1] += static_cast<T>(static_cast<double>(p[j]) * frac);
      }
    }
  }
  return out;
}

/// Cross-entropy against the projected target distribution. The projection
/// source is the target head with the smaller expected value per row — the
/// distributional analogue of clipped double-Q — and both online critics are
/// trained against it.
template <typename T>
CriticLossResult<T> c51_critic_loss(const replay::NStepBatch<T>& batch,
                                    const DeterministicPolicy<T>& lagged_policy,
                                    const CriticPair<T>& critics, const CategoricalHead<T>& head) {
  const std::size_t B = batch.size(), L = head.n_atoms;
  Mat<T> next_act = lagged_policy.act(batch.boot_obs);
  Mat<T> xq_next = concat_cols(batch.boot_obs, next_act);
  Mat<T> l1 = fa::forward(critics.q1_target, xq_next);
  Mat<T> l2 = fa::forward(critics.q2_target, xq_next);

  Mat<T> target(B, L);
  std::vector<T> p1(L), p2(L);
  for (std::size_t b = 0; b < B; ++b) {
    detail::softmax_row(l1.row(b), p1.data(), L);
    detail::softmax_row(l2.row(b), p2.data(), L);
    T e1 = T(0), e2 = T(0);
    for (std::size_t j = 0; j < L; ++j) {
      e1 += p1[j] * head.atoms[j];
      e2 += p2[j] * head.atoms[j];
    }
    const auto& src = e1 <= e2 ? p1 : p2;
    std::copy(src.begin(), src.end(), target.row(b));
  }
  Mat<T> projected = c51_project<T>(target, batch.ret, batch.eff_disc, head);

  Mat<T> xq = concat_cols(batch.obs, batch.act);
  fa::ForwardCache<T> c1, c2;
  Mat<T> o1 = fa::forward(critics.q1, xq, &c1);
  Mat<T> o2 = fa::forward(critics.q2, xq, &c2);

  CriticLossResult<T> out;
  Mat<T> up1(B, L), up2(B, L);
  T loss = T(0);
  std::vector<T> s1(L), s2(L);
  for (std::size_t b = 0; b < B; ++b) {
    detail::softmax_row(o1.row(b), s1.data(), L);
    detail::softmax_row(o2.row(b), s2.data(), L);
    const T* pj = projected.row(b);
    for (std::size_t j = 0; j < L; ++j) {
      if (pj[j] > T(0)) {
        loss -= pj[j] * std::log(std::max(s1[j], T(1e-30)));
        loss -= pj[j] * std::log(std::max(s2[j], T(1e-30)));
      }
      up1(b, j) = (s1[j] - pj[j]) / static_cast<T>(B);
      up2(b, j) = (s2[j] - pj[j]) / static_cast<T>(B);
    }
  }
  out.loss = loss / static_cast<T>(B);
  detail::check_finite(out.loss, "c51 critic loss");
  fa::backward(critics.q1, c1, up1, out.dq1);
  fa::backward(critics.q2, c2, up2, out.dq2);
  return out;
}

/// loss = -mean_b min_i E[z] under critic i's distribution at (s, pi(s)).
template <typename T>
ActorLossResult<T> c51_actor_loss(const Mat<T>& states, const DeterministicPolicy<T>& policy,
                                  const CriticPair<T>& critics, const CategoricalHead<T>& head) {
  const std::size_t B = states.rows(), L = head.n_atoms;
  fa::ForwardCache<T> pc;
  Mat<T> act = policy.act(states, &pc);
  Mat<T> xq = concat_cols(states, act);
  fa::ForwardCache<T> c1, c2;
  Mat<T> o1 = fa::forward(critics.q1, xq, &c1);
  Mat<T> o2 = fa::forward(critics.q2, xq, &c2);

  ActorLossResult<T> out;
  Mat<T> up1(B, L, T(0)), up2(B, L, T(0));
  std::vector<T> s1(L), s2(L);
  T loss = T(0);
  for (std::size_t b = 0; b < B; ++b) {
    detail::softmax_row(o1.row(b), s1.data(), L);
    detail::softmax_row(o2.row(b), s2.data(), L);
    T e1 = T(0), e2 = T(0);
    for (std::size_t j = 0; j < L; ++j) {
      e1 += s1[j] * head.atoms[j];
      e2 += s2[j] * head.atoms[j];
    }
    const bool pick1 = e1 <= e2;
    loss -= pick1 ? e1 : e2;
    // dE/dlogit_k = p_k (z_k - E) for the selected head only
    if (pick1) {
      for (std::size_t j = 0; j < L; ++j)
        up1(b, j) = -s1[j] * (head.atoms[j] - e1) / static_cast<T>(B);
    } else {
      for (std::size_t j = 0; j < L; ++j)
        up2(b, j) = -s2[j] * (head.atoms[j] - e2) / static_cast<T>(B);
    }
  }
  out.loss = loss / static_cast<T>(B);
  detail::check_finite(out.loss, "c51 actor loss");

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
