#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pql/funcapprox/mlp.hpp"
#include "pql/mat.hpp"

namespace pql::agents {

template <typename T>
Mat<T> concat_cols(const Mat<T>& a, const Mat<T>& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row mismatch");
  Mat<T> out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy(a.row(r), a.row(r) + a.cols(), out.row(r));
    std::copy(b.row(r), b.row(r) + b.cols(), out.row(r) + a.cols());
  }
  return out;
}

/// Deterministic policy: MLP head squashed as a = mid + half*tanh(y) so the
/// output always lies in [low, high].
template <typename T>
struct DeterministicPolicy {
  fa::Mlp<T> net;
  T low = T(-1), high = T(1);

  T mid() const { return (low + high) / T(2); }
  T half() const { return (high - low) / T(2); }

  Mat<T> act(const Mat<T>& obs, fa::ForwardCache<T>* cache = nullptr) const {
    Mat<T> y = fa::forward(net, obs, cache);
    const T m = mid(), h = half();
    for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = m + h * std::tanh(y.data()[k]);
    return y;
  }

  /// Chains dLoss/dAction back through the squash and the MLP.
  void backward(const fa::ForwardCache<T>& cache, const Mat<T>& dact,
                std::vector<T>& grads) const {
    const Mat<T>& y = cache.post.back();
    Mat<T> dy(y.rows(), y.cols());
    const T h = half();
    for (std::size_t k = 0; k < y.size(); ++k) {
      const T t = std::tanh(y.data()[k]);
      dy.data()[k] = dact.data()[k] * h * (T(1) - t * t);
    }
    fa::backward(net, cache, dy, grads);
  }
};

/// Squashed-Gaussian policy for the entropy-regularized learner. The MLP
/// emits [mean | log_std]; sampling is reparameterized through caller-provided
/// standard normals so losses stay deterministic functions of (params, eps).
template <typename T>
struct GaussianPolicy {
  fa::Mlp<T> net;
  T low = T(-1), high = T(1);
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;
  static constexpr double kSquashFloor = 1e-6;

  std::size_t act_dim() const { return net.out_dim() / 2; }
  T mid() const { return (low + high) / T(2); }
  T half() const { return (high - low) / T(2); }

  struct Sample {
    Mat<T> act;           // squashed, in [low, high]
    std::vector<T> logp;  // per row
    Mat<T> pre;           // a_pre = mean + std*eps
    Mat<T> eps;
    fa::ForwardCache<T> cache;
  };

  Sample sample(const Mat<T>& obs, const Mat<T>& eps) const {
    Sample s;
    Mat<T> y = fa::forward(net, obs, &s.cache);
    const std::size_t B = obs.rows(), D = act_dim();
    if (eps.rows() != B || eps.cols() != D) throw std::invalid_argument("sample: eps shape");
    s.eps = eps;
    s.act.resize(B, D);
    s.pre.resize(B, D);
    s.logp.assign(B, T(0));
    const T m = mid(), h = half();
    constexpr double kLog2Pi = 1.8378770664093453;
    for (std::size_t b = 0; b < B; ++b) {
      T lp = T(0);
      for (std::size_t d = 0; d < D; ++d) {
        const T mean = y(b, d);
        T ls = y(b, d + D);
        if (ls < T(kLogStdMin)) ls = T(kLogStdMin);
        if (ls > T(kLogStdMax)) ls = T(kLogStdMax);
        const T std_ = std::exp(ls);
        const T e = eps(b, d);
        const T pre = mean + std_ * e;
        const T t = std::tanh(pre);
        s.pre(b, d) = pre;
        s.act(b, d) = m + h * t;
        const T jac = h * (T(1) - t * t) + T(kSquashFloor);
        lp += T(-0.5) * e * e - ls - T(0.5 * kLog2Pi) - std::log(jac);
      }
      s.logp[b] = lp;
    }
    return s;
  }

  /// Deterministic head for evaluation: squashed mean.
  Mat<T> mean_act(const Mat<T>& obs) const {
    Mat<T> y = fa::forward(net, obs, nullptr);
    const std::size_t B = obs.rows(), D = act_dim();
    Mat<T> a(B, D);
    const T m = mid(), h = half();
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t d = 0; d < D; ++d) a(b, d) = m + h * std::tanh(y(b, d));
    return a;
  }

  /// Accumulates parameter grads for upstream dLoss/dAct and dLoss/dLogp.
  void backward(const Sample& s, const Mat<T>& dact, const std::vector<T>& dlogp,
                std::vector<T>& grads) const {
    const Mat<T>& y = s.cache.post.back();
    const std::size_t B = s.act.rows(), D = act_dim();
    Mat<T> dy(B, 2 * D);
    const T h = half();
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t d = 0; d < D; ++d) {
        T ls = y(b, d + D);
        const bool clamped = ls < T(kLogStdMin) || ls > T(kLogStdMax);
        if (ls < T(kLogStdMin)) ls = T(kLogStdMin);
        if (ls > T(kLogStdMax)) ls = T(kLogStdMax);
        const T std_ = std::exp(ls);
        const T e = s.eps(b, d);
        const T t = std::tanh(s.pre(b, d));
        const T sech2 = T(1) - t * t;
        const T jac = h * sech2 + T(kSquashFloor);
        // d a / d pre, d logp / d pre
        const T da_dpre = h * sech2;
        const T dlp_dpre = T(2) * t * h * sech2 / jac;
        const T da = dact(b, d);
        const T dlp = dlogp[b];
        // mean channel: dpre/dmean = 1
        dy(b, d) = da * da_dpre + dlp * dlp_dpre;
        // log_std channel: dpre/dls = std*eps; plus the explicit -ls term in logp
        T dls = da * da_dpre * std_ * e + dlp * (dlp_dpre * std_ * e - T(1));
        if (clamped) dls = T(0);
        dy(b, d + D) = dls;
      }
    }
    fa::backward(net, s.cache, dy, grads);
  }
};

}  // namespace pql::agents
