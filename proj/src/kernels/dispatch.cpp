#include "pql/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "pql/kernels/scalar.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define PQL_HAVE_AVX2_TU 1
namespace pql::kernels::avx2 {
void affine_forward(const float*, const float*, const float*, float*, std::size_t, std::size_t,
                    std::size_t);
void affine_backward_input(const float*, const float*, float*, std::size_t, std::size_t,
                           std::size_t);
void affine_backward_params(const float*, const float*, float*, float*, std::size_t, std::size_t,
                            std::size_t);
void relu(float*, std::size_t);
void relu_backward(const float*, float*, std::size_t);
void adam_update(float*, const float*, float*, float*, std::size_t, float, float, float, float,
                 float, float);
void lerp_towards(float*, const float*, std::size_t, float);
void scale(float*, std::size_t, float);
void normalize_clip(const float*, const float*, const float*, float*, std::size_t, std::size_t,
                    float);
double sum_squares(const float*, std::size_t);
}  // namespace pql::kernels::avx2
#else
#define PQL_HAVE_AVX2_TU 0
#endif

namespace pql::kernels {

bool cpu_supports_avx2() {
#if PQL_HAVE_AVX2_TU
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend pick_default() {
  if (const char* env = std::getenv("PQL_KERNEL_IMPL")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_supports_avx2()) throw std::runtime_error("PQL_KERNEL_IMPL=avx2: cpu lacks avx2+fma");
      return Backend::avx2;
    }
  }
  return cpu_supports_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend> g_backend{pick_default()};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !cpu_supports_avx2())
    throw std::runtime_error("set_backend: cpu lacks avx2+fma");
  g_backend.store(b, std::memory_order_relaxed);
}

std::string backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

namespace detail {

void affine_forward_impl(Backend b, const float* in, const float* w, const float* bias, float* out,
                         std::size_t B, std::size_t I, std::size_t O) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::affine_forward(in, w, bias, out, B, I, O);
#endif
  (void)b;
  ref::affine_forward(in, w, bias, out, B, I, O);
}

void affine_backward_input_impl(Backend b, const float* g, const float* w, float* din,
                                std::size_t B, std::size_t I, std::size_t O) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::affine_backward_input(g, w, din, B, I, O);
#endif
  (void)b;
  ref::affine_backward_input(g, w, din, B, I, O);
}

void affine_backward_params_impl(Backend b, const float* in, const float* g, float* dw, float* db,
                                 std::size_t B, std::size_t I, std::size_t O) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::affine_backward_params(in, g, dw, db, B, I, O);
#endif
  (void)b;
  ref::affine_backward_params(in, g, dw, db, B, I, O);
}

void relu_impl(Backend b, float* x, std::size_t n) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::relu(x, n);
#endif
  (void)b;
  ref::relu(x, n);
}

void relu_backward_impl(Backend b, const float* pre, float* g, std::size_t n) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::relu_backward(pre, g, n);
#endif
  (void)b;
  ref::relu_backward(pre, g, n);
}

void adam_update_impl(Backend b, float* p, const float* g, float* m, float* v, std::size_t n,
                      float lr, float beta1, float beta2, float eps, float bc1, float bc2) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::adam_update(p, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
#endif
  (void)b;
  ref::adam_update(p, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}

void lerp_towards_impl(Backend b, float* target, const float* online, std::size_t n, float tau) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::lerp_towards(target, online, n, tau);
#endif
  (void)b;
  ref::lerp_towards(target, online, n, tau);
}

void scale_impl(Backend b, float* x, std::size_t n, float s) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::scale(x, n, s);
#endif
  (void)b;
  ref::scale(x, n, s);
}

void normalize_clip_impl(Backend b, const float* x, const float* mean, const float* inv_std,
                         float* out, std::size_t B, std::size_t D, float clip) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::normalize_clip(x, mean, inv_std, out, B, D, clip);
#endif
  (void)b;
  ref::normalize_clip(x, mean, inv_std, out, B, D, clip);
}

double sum_squares_impl(Backend b, const float* x, std::size_t n) {
#if PQL_HAVE_AVX2_TU
  if (b == Backend::avx2) return avx2::sum_squares(x, n);
#endif
  (void)b;
  return ref::sum_squares(x, n);
}

}  // namespace detail

void affine_forward(const float* in, const float* w, const float* bias, float* out, std::size_t B,
                    std::size_t I, std::size_t O) {
  detail::affine_forward_impl(active_backend(), in, w, bias, out, B, I, O);
}
void affine_backward_input(const float* g, const float* w, float* din, std::size_t B,
                           std::size_t I, std::size_t O) {
  detail::affine_backward_input_impl(active_backend(), g, w, din, B, I, O);
}
void affine_backward_params(const float* in, const float* g, float* dw, float* db, std::size_t B,
                            std::size_t I, std::size_t O) {
  detail::affine_backward_params_impl(active_backend(), in, g, dw, db, B, I, O);
}
void relu(float* x, std::size_t n) { detail::relu_impl(active_backend(), x, n); }
void relu_backward(const float* pre, float* g, std::size_t n) {
  detail::relu_backward_impl(active_backend(), pre, g, n);
}
void adam_update(float* p, const float* g, float* m, float* v, std::size_t n, float lr,
                 float beta1, float beta2, float eps, float bc1, float bc2) {
  detail::adam_update_impl(active_backend(), p, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}
void lerp_towards(float* target, const float* online, std::size_t n, float tau) {
  detail::lerp_towards_impl(active_backend(), target, online, n, tau);
}
void scale(float* x, std::size_t n, float s) { detail::scale_impl(active_backend(), x, n, s); }
void normalize_clip(const float* x, const float* mean, const float* inv_std, float* out,
                    std::size_t B, std::size_t D, float clip) {
  detail::normalize_clip_impl(active_backend(), x, mean, inv_std, out, B, D, clip);
}
double sum_squares(const float* x, std::size_t n) {
  return detail::sum_squares_impl(active_backend(), x, n);
}

}  // namespace pql::kernels
