#pragma once

#include <cstddef>
#include <string>

namespace pql::kernels {

// ---------------------------------------------------------------------------
// Runtime backend selection
// ---------------------------------------------------------------------------
//
// Every float kernel below has a scalar reference implementation and, on
// x86-64 with AVX2+FMA, a vectorized variant. The backend is picked once at
// startup from cpuid and can be overridden (tests pit the two against each
// other; PQL_KERNEL_IMPL=scalar|avx2 forces a choice from the environment).

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);
bool cpu_supports_avx2();
std::string backend_name(Backend b);

// ---------------------------------------------------------------------------
// Affine (fully connected) kernels. Weights are stored [in_dim x out_dim]
// row-major so that the out_dim axis is contiguous in all three passes.
// ---------------------------------------------------------------------------

// out[b,o] = bias[o] + sum_i in[b,i] * w[i,o]
void affine_forward(const float* in, const float* w, const float* bias, float* out,
                    std::size_t B, std::size_t I, std::size_t O);

// din[b,i] = sum_o g[b,o] * w[i,o]
void affine_backward_input(const float* g, const float* w, float* din,
                           std::size_t B, std::size_t I, std::size_t O);

// dw[i,o] += sum_b in[b,i] * g[b,o];  db[o] += sum_b g[b,o]
void affine_backward_params(const float* in, const float* g, float* dw, float* db,
                            std::size_t B, std::size_t I, std::size_t O);

// ---------------------------------------------------------------------------
// Elementwise kernels. These are bit-exact across backends (same operation
// order per element, no contraction).
// ---------------------------------------------------------------------------

void relu(float* x, std::size_t n);
// g[i] *= (pre[i] > 0)
void relu_backward(const float* pre, float* g, std::size_t n);
// p -= lr * mhat / (sqrt(vhat) + eps), with moment updates; bc1/bc2 are the
// bias corrections 1/(1-beta1^t), 1/(1-beta2^t) precomputed by the caller.
void adam_update(float* p, const float* g, float* m, float* v, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float bc1, float bc2);
// target[i] = tau*online[i] + (1-tau)*target[i]
void lerp_towards(float* target, const float* online, std::size_t n, float tau);
void scale(float* x, std::size_t n, float s);
// out[b,d] = clamp((x[b,d]-mean[d])*inv_std[d], -clip, clip)
void normalize_clip(const float* x, const float* mean, const float* inv_std, float* out,
                    std::size_t B, std::size_t D, float clip);

// ---------------------------------------------------------------------------
// Reductions (double accumulators in both backends).
// ---------------------------------------------------------------------------

double sum_squares(const float* x, std::size_t n);

// Explicit-backend entry points, for equivalence tests.
namespace detail {
void affine_forward_impl(Backend b, const float* in, const float* w, const float* bias,
                         float* out, std::size_t B, std::size_t I, std::size_t O);
void affine_backward_input_impl(Backend b, const float* g, const float* w, float* din,
                                std::size_t B, std::size_t I, std::size_t O);
void affine_backward_params_impl(Backend b, const float* in, const float* g, float* dw,
                                 float* db, std::size_t B, std::size_t I, std::size_t O);
void relu_impl(Backend b, float* x, std::size_t n);
void relu_backward_impl(Backend b, const float* pre, float* g, std::size_t n);
void adam_update_impl(Backend b, float* p, const float* g, float* m, float* v, std::size_t n,
                      float lr, float beta1, float beta2, float eps, float bc1, float bc2);
void lerp_towards_impl(Backend b, float* target, const float* online, std::size_t n, float tau);
void scale_impl(Backend b, float* x, std::size_t n, float s);
void normalize_clip_impl(Backend b, const float* x, const float* mean, const float* inv_std,
                         float* out, std::size_t B, std::size_t D, float clip);
double sum_squares_impl(Backend b, const float* x, std::size_t n);
}  // namespace detail

}  // namespace pql::kernels
