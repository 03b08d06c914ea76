#pragma once

#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "pql/mat.hpp"
#include "pql/vecenv/vecenv.hpp"

namespace pql::explore {

/// Per-environment Gaussian noise scales, spread uniformly over
/// [sigma_min, sigma_max]: sigma_i = sigma_min + (i-1)/(N-1)*(sigma_max-sigma_min).
struct NoiseSchedule {
  float sigma_min = 0.05f;
  float sigma_max = 0.8f;
  std::vector<float> sigma;  // one entry per environment

  std::size_t n_envs() const { return sigma.size(); }
};

inline NoiseSchedule build_schedule(float sigma_min, float sigma_max, std::size_t n_envs) {
  if (n_envs < 1) throw std::invalid_argument("noise schedule: n_envs must be >= 1");
  if (sigma_min < 0.0f || sigma_max < 0.0f)
    throw std::invalid_argument("noise schedule: negative sigma");
  if (sigma_min > sigma_max) throw std::invalid_argument("noise schedule: sigma_min > sigma_max");
  NoiseSchedule s;
  s.sigma_min = sigma_min;
  s.sigma_max = sigma_max;
  s.sigma.resize(n_envs);
  if (n_envs == 1) {
    s.sigma[0] = sigma_min;  // formula divides by N-1; fall back to the timid end
    return s;
  }
  const double lo = sigma_min, span = static_cast<double>(sigma_max) - sigma_min;
  for (std::size_t k = 0; k < n_envs; ++k)
    s.sigma[k] = static_cast<float>(lo + (static_cast<double>(k) / (n_envs - 1)) * span);
  s.sigma.front() = sigma_min;  // endpoints exact
  s.sigma.back() = sigma_max;
  return s;
}

/// Flat schedule: every environment gets the same sigma (the fixed-noise
/// baseline sweeps).
inline NoiseSchedule build_fixed_schedule(float sigma, std::size_t n_envs) {
  if (sigma < 0.0f) throw std::invalid_argument("noise schedule: negative sigma");
  NoiseSchedule s;
  s.sigma_min = s.sigma_max = sigma;
  s.sigma.assign(n_envs, sigma);
  return s;
}

/// Perturbs row i by iid N(0, sigma_i^2) per action dimension, then clamps
/// to [low, high]. Row i draws from its own stream.
inline void apply_noise(MatF& actions, const NoiseSchedule& schedule, float low, float high,
                        std::span<env::SplitMixEngine> rngs) {
  if (actions.rows() != schedule.n_envs() || rngs.size() != schedule.n_envs())
    throw std::invalid_argument("apply_noise: batch size mismatch");
  for (std::size_t i = 0; i < actions.rows(); ++i) {
    const float sig = schedule.sigma[i];
    float* row = actions.row(i);
    if (sig > 0.0f) {
      std::normal_distribution<float> gauss(0.0f, sig);
      for (std::size_t d = 0; d < actions.cols(); ++d) row[d] += gauss(rngs[i]);
    }
    for (std::size_t d = 0; d < actions.cols(); ++d) {
      if (row[d] < low) row[d] = low;
      if (row[d] > high) row[d] = high;
    }
  }
}

}  // namespace pql::explore
