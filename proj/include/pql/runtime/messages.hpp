#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pql/funcapprox/mlp.hpp"
#include "pql/funcapprox/normalizer.hpp"
#include "pql/mat.hpp"

namespace pql::rt {

/// Immutable once published; versions strictly increase per kind. Consumers
/// replace their local copy only with an equal-or-newer version.
struct PolicySnapshot {
  std::int64_t version = 0;
  fa::Mlp<float> net;
  bool stochastic = false;  // gaussian head (mean|log_std) vs deterministic
  float log_alpha = 0.0f;
  fa::NormStats norm;
};

struct CriticSnapshot {
  std::int64_t version = 0;
  fa::Mlp<float> q1, q2;  // online nets
};

/// One environment step across all N rows. boot_obs row i is the correct
/// bootstrap state: next observation while alive, terminal observation on
/// done rows (auto-reset replaces next_observations there).
struct StepSlice {
  MatF obs, act, boot_obs;
  std::vector<float> rew;  // unscaled task rewards
  std::vector<std::uint8_t> term, trunc;
};

struct DataBatch {
  std::int64_t seq = 0;
  std::vector<StepSlice> slices;
  std::shared_ptr<const PolicySnapshot> policy;
  fa::NormStats norm;
};

struct StateBatch {
  std::int64_t seq = 0;
  MatF states;
  std::shared_ptr<const CriticSnapshot> critics;
  fa::NormStats norm;
};

}  // namespace pql::rt
