#pragma once

#include <string>
#include <vector>

#include "pql/funcapprox/mlp.hpp"
#include "pql/funcapprox/normalizer.hpp"

namespace pql::fa {

/// Checkpoint payload: named networks plus the observation normalizer.
/// On disk: "PQLCKPT\x01" magic, then per-net layer shapes followed by the
/// flat row-major float parameters, then the normalizer stats — all
/// little-endian.
struct Checkpoint {
  std::vector<std::pair<std::string, Mlp<float>>> nets;
  NormStats norm;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pql::fa
