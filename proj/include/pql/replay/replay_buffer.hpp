#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "pql/mat.hpp"
#include "pql/replay/nstep.hpp"

namespace pql::replay {

/// Fixed-capacity ring over assembled records. Insertion past capacity
/// overwrites the oldest entries; sampling is uniform with replacement and
/// returns a copy.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim)
      : capacity_(capacity),
        obs_(capacity, obs_dim),
        act_(capacity, act_dim),
        boot_obs_(capacity, obs_dim),
        ret_(capacity, 0.0f),
        eff_disc_(capacity, 0.0f) {
    if (capacity == 0) throw std::invalid_argument("replay: capacity must be >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return count_; }
  std::size_t cursor() const { return cursor_; }

  void insert(const NStepBatch<float>& batch) {
    if (batch.size() == 0) return;
    if (batch.obs.cols() != obs_.cols() || batch.act.cols() != act_.cols())
      throw std::invalid_argument("replay insert: schema mismatch");
    for (std::size_t r = 0; r < batch.size(); ++r) {
      std::copy(batch.obs.row(r), batch.obs.row(r) + obs_.cols(), obs_.row(cursor_));
      std::copy(batch.act.row(r), batch.act.row(r) + act_.cols(), act_.row(cursor_));
      std::copy(batch.boot_obs.row(r), batch.boot_obs.row(r) + obs_.cols(),
                boot_obs_.row(cursor_));
      ret_[cursor_] = batch.ret[r];
      eff_disc_[cursor_] = batch.eff_disc[r];
      cursor_ = (cursor_ + 1) % capacity_;
      if (count_ < capacity_) ++count_;
    }
  }

  /// Empty when fewer than min_live records are present.
  std::optional<NStepBatch<float>> sample(std::size_t batch_size, std::mt19937_64& rng,
                                          std::size_t min_live = 1) const {
    if (count_ < min_live || count_ == 0) return std::nullopt;
    NStepBatch<float> out;
    out.obs.resize(batch_size, obs_.cols());
    out.act.resize(batch_size, act_.cols());
    out.boot_obs.resize(batch_size, obs_.cols());
    out.ret.resize(batch_size);
    out.eff_disc.resize(batch_size);
    std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
    for (std::size_t r = 0; r < batch_size; ++r) {
      const std::size_t i = pick(rng);
      std::copy(obs_.row(i), obs_.row(i) + obs_.cols(), out.obs.row(r));
      std::copy(act_.row(i), act_.row(i) + act_.cols(), out.act.row(r));
      std::copy(boot_obs_.row(i), boot_obs_.row(i) + obs_.cols(), out.boot_obs.row(r));
      out.ret[r] = ret_[i];
      out.eff_disc[r] = eff_disc_[i];
    }
    return out;
  }

  // direct row access for ring-semantics tests
  const float* obs_row(std::size_t i) const { return obs_.row(i); }
  float ret_at(std::size_t i) const { return ret_[i]; }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::size_t count_ = 0;
  MatF obs_, act_, boot_obs_;
  std::vector<float> ret_, eff_disc_;
};

/// Observation-only ring held by the policy learner.
class StateBuffer {
 public:
  StateBuffer(std::size_t capacity, std::size_t obs_dim) : capacity_(capacity), obs_(capacity, obs_dim) {
    if (capacity == 0) throw std::invalid_argument("state buffer: capacity must be >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return count_; }

  void insert(const MatF& states) {
    if (states.cols() != obs_.cols()) throw std::invalid_argument("state insert: dim mismatch");
    for (std::size_t r = 0; r < states.rows(); ++r) {
      std::copy(states.row(r), states.row(r) + obs_.cols(), obs_.row(cursor_));
      cursor_ = (cursor_ + 1) % capacity_;
      if (count_ < capacity_) ++count_;
    }
  }

  std::optional<MatF> sample(std::size_t batch_size, std::mt19937_64& rng,
                             std::size_t min_live = 1) const {
    if (count_ < min_live || count_ == 0) return std::nullopt;
    MatF out(batch_size, obs_.cols());
    std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
    for (std::size_t r = 0; r < batch_size; ++r) {
      const std::size_t i = pick(rng);
      std::copy(obs_.row(i), obs_.row(i) + obs_.cols(), out.row(r));
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::size_t count_ = 0;
  MatF obs_;
};

}  // namespace pql::replay
