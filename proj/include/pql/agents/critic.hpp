#pragma once

#include <random>
#include <vector>

#include "pql/funcapprox/mlp.hpp"
#include "pql/funcapprox/optim.hpp"

namespace pql::agents {

/// Two online critics plus their slow target copies (clipped double-Q).
template <typename T>
struct CriticPair {
  fa::Mlp<T> q1, q2, q1_target, q2_target;

  static CriticPair create(std::vector<std::size_t> sizes, std::vector<fa::Act> acts,
                           std::mt19937_64& rng) {
    CriticPair c;
    c.q1 = fa::Mlp<T>::zeros(sizes, acts);
    c.q2 = fa::Mlp<T>::zeros(std::move(sizes), std::move(acts));
    fa::init_orthogonal(c.q1, rng, T(std::sqrt(2.0)), T(1));
    fa::init_orthogonal(c.q2, rng, T(std::sqrt(2.0)), T(1));
    c.q1_target = c.q1;
    c.q2_target = c.q2;
    return c;
  }

  void soft_update_targets(T tau) {
    fa::soft_update(q1_target.flat, q1.flat, tau);
    fa::soft_update(q2_target.flat, q2.flat, tau);
  }

  void hard_sync_online(const std::vector<T>& w1, const std::vector<T>& w2) {
    q1.flat = w1;
    q2.flat = w2;
  }
};

}  // namespace pql::agents
