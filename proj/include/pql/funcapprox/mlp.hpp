#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "pql/kernels/kernels.hpp"
#include "pql/kernels/scalar.hpp"
#include "pql/mat.hpp"

namespace pql::fa {

enum class Act : std::uint8_t { identity = 0, relu = 1 };

namespace detail {

template <typename T>
void affine_forward(const T* in, const T* w, const T* bias, T* out, std::size_t B, std::size_t I,
                    std::size_t O) {
  if constexpr (std::is_same_v<T, float>)
    kernels::affine_forward(in, w, bias, out, B, I, O);
  else
    kernels::ref::affine_forward(in, w, bias, out, B, I, O);
}

template <typename T>
void affine_backward_input(const T* g, const T* w, T* din, std::size_t B, std::size_t I,
                           std::size_t O) {
  if constexpr (std::is_same_v<T, float>)
    kernels::affine_backward_input(g, w, din, B, I, O);
  else
    kernels::ref::affine_backward_input(g, w, din, B, I, O);
}

template <typename T>
void affine_backward_params(const T* in, const T* g, T* dw, T* db, std::size_t B, std::size_t I,
                            std::size_t O) {
  if constexpr (std::is_same_v<T, float>)
    kernels::affine_backward_params(in, g, dw, db, B, I, O);
  else
    kernels::ref::affine_backward_params(in, g, dw, db, B, I, O);
}

template <typename T>
void relu_inplace(T* x, std::size_t n) {
  if constexpr (std::is_same_v<T, float>)
    kernels::relu(x, n);
  else
    kernels::ref::relu(x, n);
}

template <typename T>
void relu_backward_inplace(const T* pre, T* g, std::size_t n) {
  if constexpr (std::is_same_v<T, float>)
    kernels::relu_backward(pre, g, n);
  else
    kernels::ref::relu_backward(pre, g, n);
}

}  // namespace detail

/// Plain fully connected network. Parameters live in one flat buffer
/// (per-layer weight [in x out] row-major, then bias) so the optimizer,
/// target blending and checkpointing can treat them as a single array.
template <typename T>
struct Mlp {
  std::vector<std::size_t> sizes;  // in, hidden..., out
  std::vector<Act> acts;           // one per affine layer
  std::vector<T> flat;
  std::vector<std::size_t> w_off, b_off;

  static Mlp zeros(std::vector<std::size_t> layer_sizes, std::vector<Act> activations) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("mlp: need at least in/out sizes");
    if (activations.size() != layer_sizes.size() - 1)
      throw std::invalid_argument("mlp: one activation per affine layer");
    Mlp net;
    net.sizes = std::move(layer_sizes);
    net.acts = std::move(activations);
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
      net.w_off.push_back(total);
      total += net.sizes[l] * net.sizes[l + 1];
      net.b_off.push_back(total);
      total += net.sizes[l + 1];
    }
    net.flat.assign(total, T(0));
    return net;
  }

  std::size_t layers() const { return sizes.size() - 1; }
  std::size_t in_dim() const { return sizes.front(); }
  std::size_t out_dim() const { return sizes.back(); }
  std::size_t param_count() const { return flat.size(); }

  T* w(std::size_t l) { return flat.data() + w_off[l]; }
  const T* w(std::size_t l) const { return flat.data() + w_off[l]; }
  T* b(std::size_t l) { return flat.data() + b_off[l]; }
  const T* b(std::size_t l) const { return flat.data() + b_off[l]; }

  bool same_shape(const Mlp& other) const {
    return sizes == other.sizes && acts == other.acts;
  }

  template <typename U>
  Mlp<U> cast() const {
    Mlp<U> out;
    out.sizes = sizes;
    out.acts = acts;
    out.w_off = w_off;
    out.b_off = b_off;
    out.flat.resize(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) out.flat[i] = static_cast<U>(flat[i]);
    return out;
  }
};

/// Activations kept from the last forward pass, consumed by backward.
template <typename T>
struct ForwardCache {
  Mat<T> input;
  std::vector<Mat<T>> pre;   // pre-activation of each layer
  std::vector<Mat<T>> post;  // post-activation; post.back() is the output
};

template <typename T>
void forward(const Mlp<T>& net, const Mat<T>& in, Mat<T>& out, ForwardCache<T>* cache = nullptr) {
  if (in.cols() != net.in_dim()) throw std::invalid_argument("mlp forward: input dim mismatch");
  const std::size_t B = in.rows();
  const std::size_t L = net.layers();
  if (cache) {
    cache->input = in;
    cache->pre.assign(L, {});
    cache->post.assign(L, {});
  }
  Mat<T> cur = in;
  for (std::size_t l = 0; l < L; ++l) {
    Mat<T> next(B, net.sizes[l + 1]);
    detail::affine_forward(cur.data(), net.w(l), net.b(l), next.data(), B, net.sizes[l],
                           net.sizes[l + 1]);
    if (cache) cache->pre[l] = next;
    if (net.acts[l] == Act::relu) detail::relu_inplace(next.data(), next.size());
    if (cache) cache->post[l] = next;
    cur = std::move(next);
  }
  out = std::move(cur);
}

template <typename T>
Mat<T> forward(const Mlp<T>& net, const Mat<T>& in, ForwardCache<T>* cache = nullptr) {
  Mat<T> out;
  forward(net, in, out, cache);
  return out;
}

/// Reverse-mode pass. `upstream` is dLoss/dOutput; accumulates parameter
/// gradients into `grads` (same layout as net.flat) and optionally writes
/// dLoss/dInput.
template <typename T>
void backward(const Mlp<T>& net, const ForwardCache<T>& cache, const Mat<T>& upstream,
              std::vector<T>& grads, Mat<T>* dinput = nullptr) {
  const std::size_t B = upstream.rows();
  const std::size_t L = net.layers();
  if (upstream.cols() != net.out_dim()) throw std::invalid_argument("mlp backward: grad dim");
  if (grads.size() != net.flat.size()) grads.assign(net.flat.size(), T(0));

  Mat<T> g = upstream;
  for (std::size_t l = L; l-- > 0;) {
    if (net.acts[l] == Act::relu)
      detail::relu_backward_inplace(cache.pre[l].data(), g.data(), g.size());
    const Mat<T>& layer_in = l == 0 ? cache.input : cache.post[l - 1];
    detail::affine_backward_params(layer_in.data(), g.data(), grads.data() + net.w_off[l],
                                   grads.data() + net.b_off[l], B, net.sizes[l], net.sizes[l + 1]);
    if (l > 0 || dinput) {
      Mat<T> din(B, net.sizes[l]);
      detail::affine_backward_input(g.data(), net.w(l), din.data(), B, net.sizes[l],
                                    net.sizes[l + 1]);
      g = std::move(din);
    }
  }
  if (dinput) *dinput = std::move(g);
}

/// dLoss/dInput only; parameters are treated as frozen.
template <typename T>
Mat<T> backward_input_only(const Mlp<T>& net, const ForwardCache<T>& cache,
                           const Mat<T>& upstream) {
  const std::size_t B = upstream.rows();
  Mat<T> g = upstream;
  for (std::size_t l = net.layers(); l-- > 0;) {
    if (net.acts[l] == Act::relu)
      detail::relu_backward_inplace(cache.pre[l].data(), g.data(), g.size());
    Mat<T> din(B, net.sizes[l]);
    detail::affine_backward_input(g.data(), net.w(l), din.data(), B, net.sizes[l],
                                  net.sizes[l + 1]);
    g = std::move(din);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Initialization: orthogonal weights, zero biases.
// ---------------------------------------------------------------------------

namespace detail {

// Orthonormal columns via modified Gram-Schmidt on a Gaussian draw.
template <typename T>
void orthogonalize(std::vector<T>& a, std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      T dot = T(0);
      for (std::size_t r = 0; r < rows; ++r) dot += a[r * cols + c] * a[r * cols + p];
      for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] -= dot * a[r * cols + p];
    }
    T norm = T(0);
    for (std::size_t r = 0; r < rows; ++r) norm += a[r * cols + c] * a[r * cols + c];
    norm = std::sqrt(norm);
    if (norm < T(1e-12)) norm = T(1);
    for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] /= norm;
  }
}

}  // namespace detail

/// Orthogonal init with per-layer gain; the caller passes a smaller gain for
/// a policy head to start near-zero actions.
template <typename T>
void init_orthogonal(Mlp<T>& net, std::mt19937_64& rng, T hidden_gain, T final_gain) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const std::size_t in = net.sizes[l], out = net.sizes[l + 1];
    const std::size_t big = std::max(in, out), small = std::min(in, out);
    std::vector<T> m(big * small);
    for (auto& x : m) x = static_cast<T>(gauss(rng));
    detail::orthogonalize(m, big, small);
    const T gain = (l + 1 == net.layers()) ? final_gain : hidden_gain;
    // m has orthonormal columns [big x small]; map onto w [in x out]
    T* w = net.w(l);
    for (std::size_t i = 0; i < in; ++i)
      for (std::size_t o = 0; o < out; ++o) {
        const T v = (in >= out) ? m[i * small + o] : m[o * small + i];
        w[i * out + o] = gain * v;
      }
    for (std::size_t o = 0; o < out; ++o) net.b(l)[o] = T(0);
  }
}

}  // namespace pql::fa
