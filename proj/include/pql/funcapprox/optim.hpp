#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "pql/kernels/kernels.hpp"
#include "pql/kernels/scalar.hpp"

namespace pql::fa {

template <typename T>
struct AdamState {
  std::vector<T> m, v;
  std::int64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, T(0)), v(n, T(0)) {}
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
void adam_step(std::vector<T>& params, const std::vector<T>& grads, AdamState<T>& state, T lr,
               const AdamConfig& cfg = {}) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  for (const T g : grads)
    if (!std::isfinite(static_cast<double>(g))) throw std::runtime_error("adam_step: non-finite gradient");
  state.t += 1;
  const double b1t = std::pow(cfg.beta1, static_cast<double>(state.t));
  const double b2t = std::pow(cfg.beta2, static_cast<double>(state.t));
  const T bc1 = static_cast<T>(1.0 / (1.0 - b1t));
  const T bc2 = static_cast<T>(1.0 / (1.0 - b2t));
  if constexpr (std::is_same_v<T, float>) {
    kernels::adam_update(params.data(), grads.data(), state.m.data(), state.v.data(),
                         params.size(), lr, static_cast<float>(cfg.beta1),
                         static_cast<float>(cfg.beta2), static_cast<float>(cfg.eps), bc1, bc2);
  } else {
    kernels::ref::adam_update(params.data(), grads.data(), state.m.data(), state.v.data(),
                              params.size(), lr, static_cast<T>(cfg.beta1),
                              static_cast<T>(cfg.beta2), static_cast<T>(cfg.eps), bc1, bc2);
  }
}

/// Scales all gradients by max_norm/norm when the global l2 norm exceeds
/// max_norm. The scale carries a one-ulp-scale safety margin so the clipped
/// norm never rounds above the bound.
template <typename T>
void clip_global_norm(std::vector<T>& grads, T max_norm = T(0.5)) {
  if (!(max_norm > T(0))) throw std::invalid_argument("clip_global_norm: max_norm must be > 0");
  double sq;
  if constexpr (std::is_same_v<T, float>)
    sq = kernels::sum_squares(grads.data(), grads.size());
  else
    sq = kernels::ref::sum_squares(grads.data(), grads.size());
  const double norm = std::sqrt(sq);
  if (norm <= static_cast<double>(max_norm)) return;
  const T s = static_cast<T>(static_cast<double>(max_norm) / norm * (1.0 - 1e-6));
  if constexpr (std::is_same_v<T, float>)
    kernels::scale(grads.data(), grads.size(), s);
  else
    kernels::ref::scale(grads.data(), grads.size(), s);
}

/// target = tau*online + (1-tau)*target, elementwise over flat params.
template <typename T>
void soft_update(std::vector<T>& target, const std::vector<T>& online, T tau) {
  if (target.size() != online.size()) throw std::invalid_argument("soft_update: size mismatch");
  if constexpr (std::is_same_v<T, float>)
    kernels::lerp_towards(target.data(), online.data(), target.size(), tau);
  else
    kernels::ref::lerp_towards(target.data(), online.data(), target.size(), tau);
}

}  // namespace pql::fa
