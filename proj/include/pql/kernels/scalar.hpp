#pragma once

#include <cmath>
#include <cstddef>

// Scalar reference kernels. Templated so tests can instantiate double
// oracles; the float instantiation is the dispatch fallback and the
// ground truth the AVX2 variants are checked against.

namespace pql::kernels::ref {

template <typename T>
void affine_forward(const T* in, const T* w, const T* bias, T* out,
                    std::size_t B, std::size_t I, std::size_t O) {
  for (std::size_t b = 0; b < B; ++b) {
    const T* x = in + b * I;
    T* y = out + b * O;
    for (std::size_t o = 0; o < O; ++o) y[o] = bias[o];
    for (std::size_t i = 0; i < I; ++i) {
      const T xi = x[i];
      const T* wrow = w + i * O;
      for (std::size_t o = 0; o < O; ++o) y[o] += xi * wrow[o];
    }
  }
}

template <typename T>
void affine_backward_input(const T* g, const T* w, T* din,
                           std::size_t B, std::size_t I, std::size_t O) {
  for (std::size_t b = 0; b < B; ++b) {
    const T* grow = g + b * O;
    T* drow = din + b * I;
    for (std::size_t i = 0; i < I; ++i) {
      const T* wrow = w + i * O;
      T acc = T(0);
      for (std::size_t o = 0; o < O; ++o) acc += grow[o] * wrow[o];
      drow[i] = acc;
    }
  }
}

template <typename T>
void affine_backward_params(const T* in, const T* g, T* dw, T* db,
                            std::size_t B, std::size_t I, std::size_t O) {
  for (std::size_t b = 0; b < B; ++b) {
    const T* x = in + b * I;
    const T* grow = g + b * O;
    for (std::size_t o = 0; o < O; ++o) db[o] += grow[o];
    for (std::size_t i = 0; i < I; ++i) {
      const T xi = x[i];
      T* wrow = dw + i * O;
      for (std::size_t o = 0; o < O; ++o) wrow[o] += xi * grow[o];
    }
  }
}

template <typename T>
void relu(T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* pre, T* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pre[i] > T(0))) g[i] = T(0);
  }
}

template <typename T>
void adam_update(T* p, const T* g, T* m, T* v, std::size_t n,
                 T lr, T beta1, T beta2, T eps, T bc1, T bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    const T gi = g[i];
    m[i] = beta1 * m[i] + (T(1) - beta1) * gi;
    v[i] = beta2 * v[i] + (T(1) - beta2) * (gi * gi);
    const T mhat = m[i] * bc1;
    const T vhat = v[i] * bc2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

template <typename T>
void lerp_towards(T* target, const T* online, std::size_t n, T tau) {
  const T keep = T(1) - tau;
  for (std::size_t i = 0; i < n; ++i) target[i] = tau * online[i] + keep * target[i];
}

template <typename T>
void scale(T* x, std::size_t n, T s) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

template <typename T>
void normalize_clip(const T* x, const T* mean, const T* inv_std, T* out,
                    std::size_t B, std::size_t D, T clip) {
  for (std::size_t b = 0; b < B; ++b) {
    const T* xr = x + b * D;
    T* yr = out + b * D;
    for (std::size_t d = 0; d < D; ++d) {
      T z = (xr[d] - mean[d]) * inv_std[d];
      if (z > clip) z = clip;
      if (z < -clip) z = -clip;
      yr[d] = z;
    }
  }
}

template <typename T>
double sum_squares(const T* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(x[i]);
    acc += xi * xi;
  }
  return acc;
}

}  // namespace pql::kernels::ref
