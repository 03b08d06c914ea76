#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pql/kernels/kernels.hpp"
#include "pql/mat.hpp"

namespace pql::fa {

/// Frozen normalizer statistics as shipped between processes.
struct NormStats {
  std::int64_t count = 0;
  std::vector<double> mean, m2;

  std::size_t dim() const { return mean.size(); }
  bool identity() const { return count <= 1; }
};

/// Per-dimension running mean/variance (Welford, merged batch-wise with
/// Chan's parallel formula). Stats accumulate in double regardless of the
/// pipeline precision.
class RunningNormalizer {
 public:
  explicit RunningNormalizer(std::size_t dim = 0) : stats_{0, std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)} {}
  explicit RunningNormalizer(NormStats s) : stats_(std::move(s)) {}

  std::size_t dim() const { return stats_.dim(); }
  const NormStats& stats() const { return stats_; }

  void update(const MatF& batch) {
    if (batch.rows() == 0) return;
    if (batch.cols() != dim()) throw std::invalid_argument("normalizer: dim mismatch");
    const std::size_t d = dim();
    std::vector<double> bmean(d, 0.0), bm2(d, 0.0);
    double n = 0.0;
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      n += 1.0;
      const float* row = batch.row(r);
      for (std::size_t j = 0; j < d; ++j) {
        const double x = row[j];
        const double delta = x - bmean[j];
        bmean[j] += delta / n;
        bm2[j] += delta * (x - bmean[j]);
      }
    }
    merge(static_cast<std::int64_t>(batch.rows()), bmean, bm2);
  }

  /// (x - mean) / sqrt(var + 1e-8), clipped to [-5, 5]. Identity while
  /// count <= 1.
  MatF apply(const MatF& obs) const { return apply_stats(stats_, obs); }

  static MatF apply_stats(const NormStats& s, const MatF& obs) {
    if (s.identity()) return obs;
    if (obs.cols() != s.dim()) throw std::invalid_argument("normalizer: dim mismatch");
    const std::size_t d = s.dim();
    std::vector<float> mean(d), inv_std(d);
    for (std::size_t j = 0; j < d; ++j) {
      mean[j] = static_cast<float>(s.mean[j]);
      const double var = s.m2[j] / static_cast<double>(s.count);
      inv_std[j] = static_cast<float>(1.0 / std::sqrt(var + 1e-8));
    }
    MatF out(obs.rows(), obs.cols());
    kernels::normalize_clip(obs.data(), mean.data(), inv_std.data(), out.data(), obs.rows(), d,
                            5.0f);
    return out;
  }

 private:
  void merge(std::int64_t bcount, const std::vector<double>& bmean, const std::vector<double>& bm2) {
    const double na = static_cast<double>(stats_.count);
    const double nb = static_cast<double>(bcount);
    const double nab = na + nb;
    for (std::size_t j = 0; j < dim(); ++j) {
      const double delta = bmean[j] - stats_.mean[j];
      stats_.mean[j] += delta * (nb / nab);
      stats_.m2[j] += bm2[j] + delta * delta * (na * nb / nab);
    }
    stats_.count += bcount;
  }

  NormStats stats_;
};

}  // namespace pql::fa
