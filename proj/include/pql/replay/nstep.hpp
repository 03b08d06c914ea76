#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pql/mat.hpp"

namespace pql::replay {

/// Columnar batch of assembled records: state, action, truncated return
/// G = sum_{k<m} gamma^k r_{t+k}, the bootstrap state s_{t+m}, and the
/// effective discount gamma^m * (1 - terminated).
template <typename T>
struct NStepBatch {
  Mat<T> obs, act, boot_obs;
  std::vector<T> ret, eff_disc;

  std::size_t size() const { return ret.size(); }

  void clear() {
    obs.resize(0, obs.cols());
    act.resize(0, act.cols());
    boot_obs.resize(0, boot_obs.cols());
    ret.clear();
    eff_disc.clear();
  }
};

/// Rolls per-environment windows of the last n transitions and emits a
/// record whenever a horizon closes: after n steps, or early when the
/// episode ends (terminal records carry eff_disc 0; truncated ones keep
/// gamma^m and bootstrap at the terminal observation). Windows never span
/// an episode boundary.
template <typename T>
class NStepAssembler {
 public:
  NStepAssembler(std::size_t n_envs, std::size_t obs_dim, std::size_t act_dim, T gamma,
                 std::size_t horizon)
      : n_envs_(n_envs),
        obs_dim_(obs_dim),
        act_dim_(act_dim),
        gamma_(gamma),
        horizon_(horizon),
        obs_(n_envs * horizon, obs_dim),
        act_(n_envs * horizon, act_dim),
        rew_(n_envs * horizon, T(0)),
        head_(n_envs, 0),
        count_(n_envs, 0) {
    if (horizon < 1) throw std::invalid_argument("nstep: horizon must be >= 1");
  }

  std::size_t horizon() const { return horizon_; }

  /// One batched environment step (rewards already reward-scaled). Emitted
  /// records are appended to `out`.
  void push_step(const Mat<T>& obs, const Mat<T>& act, std::span<const T> rew,
                 std::span<const std::uint8_t> term, std::span<const std::uint8_t> trunc,
                 const Mat<T>& boot_obs, NStepBatch<T>& out) {
    if (obs.rows() != n_envs_ || act.rows() != n_envs_ || rew.size() != n_envs_)
      throw std::invalid_argument("nstep: batch size mismatch");
    ensure_shape(out);
    for (std::size_t e = 0; e < n_envs_; ++e) {
      push_env(e, obs.row(e), act.row(e), rew[e], term[e], trunc[e] || term[e], boot_obs.row(e),
               out);
    }
  }

  /// Single-environment variant (oracle tests drive one trajectory at a time).
  void push_env(std::size_t e, const T* obs, const T* act, T rew, bool terminated, bool done,
                const T* boot_obs, NStepBatch<T>& out) {
    ensure_shape(out);
    const std::size_t slot = e * horizon_ + (head_[e] + count_[e]) % horizon_;
    std::copy(obs, obs + obs_dim_, obs_.row(slot));
    std::copy(act, act + act_dim_, act_.row(slot));
    rew_[slot] = rew;
    count_[e] += 1;

    if (count_[e] == horizon_) {
      emit(e, horizon_, terminated && done, boot_obs, out);
      head_[e] = (head_[e] + 1) % horizon_;
      count_[e] -= 1;
    }
    if (done) {
      while (count_[e] > 0) {
        emit(e, count_[e], terminated, boot_obs, out);
        head_[e] = (head_[e] + 1) % horizon_;
        count_[e] -= 1;
      }
      head_[e] = 0;
    }
  }

 private:
  void ensure_shape(NStepBatch<T>& out) const {
    if (out.obs.cols() != obs_dim_) {
      out.obs.resize(0, obs_dim_);
      out.act.resize(0, act_dim_);
      out.boot_obs.resize(0, obs_dim_);
    }
  }

  void emit(std::size_t e, std::size_t m, bool terminated, const T* boot_obs, NStepBatch<T>& out) {
    T g = T(0);
    T disc = T(1);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t slot = e * horizon_ + (head_[e] + k) % horizon_;
      g += disc * rew_[slot];
      disc *= gamma_;
    }
    const std::size_t front = e * horizon_ + head_[e];
    out.obs.append_row(obs_.row(front));
    out.act.append_row(act_.row(front));
    out.boot_obs.append_row(boot_obs);
    out.ret.push_back(g);
    out.eff_disc.push_back(terminated ? T(0) : disc);
  }

  std::size_t n_envs_, obs_dim_, act_dim_;
  T gamma_;
  std::size_t horizon_;
  Mat<T> obs_, act_;
  std::vector<T> rew_;
  std::vector<std::size_t> head_, count_;
};

}  // namespace pql::replay
