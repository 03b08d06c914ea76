// AVX2+FMA kernel variants. This TU is the only one compiled with -mavx2
// -mfma; it must not be entered unless cpuid reports AVX2 (the dispatcher
// guarantees that).
//
// Elementwise kernels mirror the scalar reference operation-for-operation so
// the two backends agree bit-exactly. The affine kernels use FMA and lane
// reassociation, so they are tolerance-checked against a double oracle
// instead.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

namespace pql::kernels::avx2 {

namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

}  // namespace

// ---------------------------------------------------------------------------
// out[b,o] = bias[o] + sum_i in[b,i] * w[i,o]
// Register tile: 6 batch rows x 16 outputs, accumulating over i.
// ---------------------------------------------------------------------------
void affine_forward(const float* in, const float* w, const float* bias, float* out,
                    std::size_t B, std::size_t I, std::size_t O) {
  std::size_t b = 0;
  for (; b + 6 <= B; b += 6) {
    std::size_t o = 0;
    for (; o + 16 <= O; o += 16) {
      const __m256 bia0 = _mm256_loadu_ps(bias + o);
      const __m256 bia1 = _mm256_loadu_ps(bias + o + 8);
      __m256 acc[6][2];
      for (int r = 0; r < 6; ++r) {
        acc[r][0] = bia0;
        acc[r][1] = bia1;
      }
      for (std::size_t i = 0; i < I; ++i) {
        const float* wr = w + i * O + o;
        const __m256 w0 = _mm256_loadu_ps(wr);
        const __m256 w1 = _mm256_loadu_ps(wr + 8);
        for (int r = 0; r < 6; ++r) {
          const __m256 v = _mm256_broadcast_ss(in + (b + r) * I + i);
          acc[r][0] = _mm256_fmadd_ps(v, w0, acc[r][0]);
          acc[r][1] = _mm256_fmadd_ps(v, w1, acc[r][1]);
        }
      }
      for (int r = 0; r < 6; ++r) {
        float* y = out + (b + r) * O + o;
        _mm256_storeu_ps(y, acc[r][0]);
        _mm256_storeu_ps(y + 8, acc[r][1]);
      }
    }
    for (; o + 8 <= O; o += 8) {
      const __m256 bia = _mm256_loadu_ps(bias + o);
      __m256 acc[6] = {bia, bia, bia, bia, bia, bia};
      for (std::size_t i = 0; i < I; ++i) {
        const __m256 wv = _mm256_loadu_ps(w + i * O + o);
        for (int r = 0; r < 6; ++r)
          acc[r] = _mm256_fmadd_ps(_mm256_broadcast_ss(in + (b + r) * I + i), wv, acc[r]);
      }
      for (int r = 0; r < 6; ++r) _mm256_storeu_ps(out + (b + r) * O + o, acc[r]);
    }
    for (; o < O; ++o) {
      // narrow output tail: dot down the strided w column
      for (std::size_t r = 0; r < 6; ++r) {
        const float* x = in + (b + r) * I;
        float acc = bias[o];
        for (std::size_t i = 0; i < I; ++i) acc += x[i] * w[i * O + o];
        out[(b + r) * O + o] = acc;
      }
    }
  }
  for (; b < B; ++b) {
    const float* x = in + b * I;
    std::size_t o = 0;
    for (; o + 8 <= O; o += 8) {
      __m256 acc = _mm256_loadu_ps(bias + o);
      for (std::size_t i = 0; i < I; ++i)
        acc = _mm256_fmadd_ps(_mm256_broadcast_ss(x + i), _mm256_loadu_ps(w + i * O + o), acc);
      _mm256_storeu_ps(out + b * O + o, acc);
    }
    for (; o < O; ++o) {
      float acc = bias[o];
      for (std::size_t i = 0; i < I; ++i) acc += x[i] * w[i * O + o];
      out[b * O + o] = acc;
    }
  }
}

// ---------------------------------------------------------------------------
// din[b,i] = sum_o g[b,o] * w[i,o]   (dot of two contiguous rows)
// Four batch rows share each pass over w so the weight matrix is streamed
// from L2 once per group instead of once per row.
// ---------------------------------------------------------------------------
void affine_backward_input(const float* g, const float* w, float* din,
                           std::size_t B, std::size_t I, std::size_t O) {
  std::size_t b = 0;
  for (; b + 4 <= B; b += 4) {
    const float* g0 = g + (b + 0) * O;
    const float* g1 = g + (b + 1) * O;
    const float* g2 = g + (b + 2) * O;
    const float* g3 = g + (b + 3) * O;
    std::size_t i = 0;
    for (; i + 2 <= I; i += 2) {
      const float* wa = w + (i + 0) * O;
      const float* wb = w + (i + 1) * O;
      __m256 a0a = _mm256_setzero_ps(), a0b = _mm256_setzero_ps();
      __m256 a1a = _mm256_setzero_ps(), a1b = _mm256_setzero_ps();
      __m256 a2a = _mm256_setzero_ps(), a2b = _mm256_setzero_ps();
      __m256 a3a = _mm256_setzero_ps(), a3b = _mm256_setzero_ps();
      std::size_t o = 0;
      for (; o + 8 <= O; o += 8) {
        const __m256 va = _mm256_loadu_ps(wa + o);
        const __m256 vb = _mm256_loadu_ps(wb + o);
        const __m256 v0 = _mm256_loadu_ps(g0 + o);
        const __m256 v1 = _mm256_loadu_ps(g1 + o);
        const __m256 v2 = _mm256_loadu_ps(g2 + o);
        const __m256 v3 = _mm256_loadu_ps(g3 + o);
        a0a = _mm256_fmadd_ps(v0, va, a0a);
        a0b = _mm256_fmadd_ps(v0, vb, a0b);
        a1a = _mm256_fmadd_ps(v1, va, a1a);
        a1b = _mm256_fmadd_ps(v1, vb, a1b);
        a2a = _mm256_fmadd_ps(v2, va, a2a);
        a2b = _mm256_fmadd_ps(v2, vb, a2b);
        a3a = _mm256_fmadd_ps(v3, va, a3a);
        a3b = _mm256_fmadd_ps(v3, vb, a3b);
      }
      float s0a = hsum8(a0a), s0b = hsum8(a0b);
      float s1a = hsum8(a1a), s1b = hsum8(a1b);
      float s2a = hsum8(a2a), s2b = hsum8(a2b);
      float s3a = hsum8(a3a), s3b = hsum8(a3b);
      for (; o < O; ++o) {
        s0a += g0[o] * wa[o];
        s0b += g0[o] * wb[o];
        s1a += g1[o] * wa[o];
        s1b += g1[o] * wb[o];
        s2a += g2[o] * wa[o];
        s2b += g2[o] * wb[o];
        s3a += g3[o] * wa[o];
        s3b += g3[o] * wb[o];
      }
      din[(b + 0) * I + i] = s0a;
      din[(b + 0) * I + i + 1] = s0b;
      din[(b + 1) * I + i] = s1a;
      din[(b + 1) * I + i + 1] = s1b;
      din[(b + 2) * I + i] = s2a;
      din[(b + 2) * I + i + 1] = s2b;
      din[(b + 3) * I + i] = s3a;
      din[(b + 3) * I + i + 1] = s3b;
    }
    for (; i < I; ++i) {
      const float* wr = w + i * O;
      for (std::size_t r = 0; r < 4; ++r) {
        const float* grow = g + (b + r) * O;
        __m256 a = _mm256_setzero_ps();
        std::size_t o = 0;
        for (; o + 8 <= O; o += 8)
          a = _mm256_fmadd_ps(_mm256_loadu_ps(grow + o), _mm256_loadu_ps(wr + o), a);
        float s = hsum8(a);
        for (; o < O; ++o) s += grow[o] * wr[o];
        din[(b + r) * I + i] = s;
      }
    }
  }
  for (; b < B; ++b) {
    const float* grow = g + b * O;
    float* drow = din + b * I;
    for (std::size_t i = 0; i < I; ++i) {
      const float* wr = w + i * O;
      __m256 a = _mm256_setzero_ps();
      std::size_t o = 0;
      for (; o + 8 <= O; o += 8)
        a = _mm256_fmadd_ps(_mm256_loadu_ps(grow + o), _mm256_loadu_ps(wr + o), a);
      float s = hsum8(a);
      for (; o < O; ++o) s += grow[o] * wr[o];
      drow[i] = s;
    }
  }
}

// ---------------------------------------------------------------------------
// dw[i,o] += sum_b in[b,i]*g[b,o];  db[o] += sum_b g[b,o]
// Batch rows are blocked so each 4x16 dw tile is accumulated in registers
// across the block before touching memory.
// ---------------------------------------------------------------------------
void affine_backward_params(const float* in, const float* g, float* dw, float* db,
                            std::size_t B, std::size_t I, std::size_t O) {
  constexpr std::size_t kBlock = 64;
  for (std::size_t b0 = 0; b0 < B; b0 += kBlock) {
    const std::size_t bend = b0 + kBlock < B ? b0 + kBlock : B;
    // db: plain column sums over the block
    {
      std::size_t o = 0;
      for (; o + 8 <= O; o += 8) {
        __m256 acc = _mm256_loadu_ps(db + o);
        for (std::size_t b = b0; b < bend; ++b)
          acc = _mm256_add_ps(acc, _mm256_loadu_ps(g + b * O + o));
        _mm256_storeu_ps(db + o, acc);
      }
      for (; o < O; ++o) {
        float acc = db[o];
        for (std::size_t b = b0; b < bend; ++b) acc += g[b * O + o];
        db[o] = acc;
      }
    }
    std::size_t i = 0;
    for (; i + 4 <= I; i += 4) {
      std::size_t o = 0;
      for (; o + 16 <= O; o += 16) {
        __m256 a00 = _mm256_setzero_ps(), a01 = _mm256_setzero_ps();
        __m256 a10 = _mm256_setzero_ps(), a11 = _mm256_setzero_ps();
        __m256 a20 = _mm256_setzero_ps(), a21 = _mm256_setzero_ps();
        __m256 a30 = _mm256_setzero_ps(), a31 = _mm256_setzero_ps();
        for (std::size_t b = b0; b < bend; ++b) {
          const float* x = in + b * I + i;
          const float* gr = g + b * O + o;
          const __m256 g0 = _mm256_loadu_ps(gr);
          const __m256 g1 = _mm256_loadu_ps(gr + 8);
          const __m256 v0 = _mm256_broadcast_ss(x + 0);
          const __m256 v1 = _mm256_broadcast_ss(x + 1);
          const __m256 v2 = _mm256_broadcast_ss(x + 2);
          const __m256 v3 = _mm256_broadcast_ss(x + 3);
          a00 = _mm256_fmadd_ps(v0, g0, a00);
          a01 = _mm256_fmadd_ps(v0, g1, a01);
          a10 = _mm256_fmadd_ps(v1, g0, a10);
          a11 = _mm256_fmadd_ps(v1, g1, a11);
          a20 = _mm256_fmadd_ps(v2, g0, a20);
          a21 = _mm256_fmadd_ps(v2, g1, a21);
          a30 = _mm256_fmadd_ps(v3, g0, a30);
          a31 = _mm256_fmadd_ps(v3, g1, a31);
        }
        float* d0 = dw + (i + 0) * O + o;
        float* d1 = dw + (i + 1) * O + o;
        float* d2 = dw + (i + 2) * O + o;
        float* d3 = dw + (i + 3) * O + o;
        _mm256_storeu_ps(d0, _mm256_add_ps(_mm256_loadu_ps(d0), a00));
        _mm256_storeu_ps(d0 + 8, _mm256_add_ps(_mm256_loadu_ps(d0 + 8), a01));
        _mm256_storeu_ps(d1, _mm256_add_ps(_mm256_loadu_ps(d1), a10));
        _mm256_storeu_ps(d1 + 8, _mm256_add_ps(_mm256_loadu_ps(d1 + 8), a11));
        _mm256_storeu_ps(d2, _mm256_add_ps(_mm256_loadu_ps(d2), a20));
        _mm256_storeu_ps(d2 + 8, _mm256_add_ps(_mm256_loadu_ps(d2 + 8), a21));
        _mm256_storeu_ps(d3, _mm256_add_ps(_mm256_loadu_ps(d3), a30));
        _mm256_storeu_ps(d3 + 8, _mm256_add_ps(_mm256_loadu_ps(d3 + 8), a31));
      }
      for (; o + 8 <= O; o += 8) {
        __m256 a0 = _mm256_setzero_ps(), a1 = _mm256_setzero_ps();
        __m256 a2 = _mm256_setzero_ps(), a3 = _mm256_setzero_ps();
        for (std::size_t b = b0; b < bend; ++b) {
          const float* x = in + b * I + i;
          const __m256 gv = _mm256_loadu_ps(g + b * O + o);
          a0 = _mm256_fmadd_ps(_mm256_broadcast_ss(x + 0), gv, a0);
          a1 = _mm256_fmadd_ps(_mm256_broadcast_ss(x + 1), gv, a1);
          a2 = _mm256_fmadd_ps(_mm256_broadcast_ss(x + 2), gv, a2);
          a3 = _mm256_fmadd_ps(_mm256_broadcast_ss(x + 3), gv, a3);
        }
        for (std::size_t r = 0; r < 4; ++r) {
          float* d = dw + (i + r) * O + o;
          const __m256 acc = r == 0 ? a0 : r == 1 ? a1 : r == 2 ? a2 : a3;
          _mm256_storeu_ps(d, _mm256_add_ps(_mm256_loadu_ps(d), acc));
        }
      }
      for (; o < O; ++o) {
        for (std::size_t r = 0; r < 4; ++r) {
          float acc = 0.f;
          for (std::size_t b = b0; b < bend; ++b) acc += in[b * I + i + r] * g[b * O + o];
          dw[(i + r) * O + o] += acc;
        }
      }
    }
    for (; i < I; ++i) {
      std::size_t o = 0;
      for (; o + 8 <= O; o += 8) {
        __m256 acc = _mm256_setzero_ps();
        for (std::size_t b = b0; b < bend; ++b)
          acc = _mm256_fmadd_ps(_mm256_broadcast_ss(in + b * I + i),
                                _mm256_loadu_ps(g + b * O + o), acc);
        float* d = dw + i * O + o;
        _mm256_storeu_ps(d, _mm256_add_ps(_mm256_loadu_ps(d), acc));
      }
      for (; o < O; ++o) {
        float acc = 0.f;
        for (std::size_t b = b0; b < bend; ++b) acc += in[b * I + i] * g[b * O + o];
        dw[i * O + o] += acc;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise kernels, bit-exact vs the scalar reference.
// ---------------------------------------------------------------------------

void relu(float* x, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) x[i] = x[i] > 0.f ? x[i] : 0.f;
}

void relu_backward(const float* pre, float* g, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_ps(g + i, _mm256_and_ps(_mm256_loadu_ps(g + i), mask));
  }
  for (; i < n; ++i) {
    if (!(pre[i] > 0.f)) g[i] = 0.f;
  }
}

void adam_update(float* p, const float* g, float* m, float* v, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float bc1, float bc2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vq1 = _mm256_set1_ps(1.f - beta1);
  const __m256 vq2 = _mm256_set1_ps(1.f - beta2);
  const __m256 vbc1 = _mm256_set1_ps(bc1);
  const __m256 vbc2 = _mm256_set1_ps(bc2);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vlr = _mm256_set1_ps(lr);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    // mul/add kept separate to match the scalar reference rounding
    __m256 mv = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(vq1, gv));
    __m256 vv = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                              _mm256_mul_ps(vq2, _mm256_mul_ps(gv, gv)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_mul_ps(mv, vbc1);
    const __m256 vhat = _mm256_mul_ps(vv, vbc2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    const __m256 step = _mm256_mul_ps(vlr, _mm256_div_ps(mhat, denom));
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
  }
  for (; i < n; ++i) {
    const float gi = g[i];
    m[i] = beta1 * m[i] + (1.f - beta1) * gi;
    v[i] = beta2 * v[i] + (1.f - beta2) * (gi * gi);
    const float mhat = m[i] * bc1;
    const float vhat = v[i] * bc2;
    p[i] -= lr * (mhat / (__builtin_sqrtf(vhat) + eps));
  }
}

void lerp_towards(float* target, const float* online, std::size_t n, float tau) {
  const __m256 vt = _mm256_set1_ps(tau);
  const __m256 vk = _mm256_set1_ps(1.f - tau);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 o = _mm256_mul_ps(vt, _mm256_loadu_ps(online + i));
    const __m256 t = _mm256_mul_ps(vk, _mm256_loadu_ps(target + i));
    _mm256_storeu_ps(target + i, _mm256_add_ps(o, t));
  }
  const float keep = 1.f - tau;
  for (; i < n; ++i) target[i] = tau * online[i] + keep * target[i];
}

void scale(float* x, std::size_t n, float s) {
  const __m256 vs = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), vs));
  for (; i < n; ++i) x[i] *= s;
}

void normalize_clip(const float* x, const float* mean, const float* inv_std, float* out,
                    std::size_t B, std::size_t D, float clip) {
  const __m256 vc = _mm256_set1_ps(clip);
  const __m256 vnc = _mm256_set1_ps(-clip);
  for (std::size_t b = 0; b < B; ++b) {
    const float* xr = x + b * D;
    float* yr = out + b * D;
    std::size_t d = 0;
    for (; d + 8 <= D; d += 8) {
      __m256 z = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(xr + d), _mm256_loadu_ps(mean + d)),
                               _mm256_loadu_ps(inv_std + d));
      z = _mm256_min_ps(z, vc);
      z = _mm256_max_ps(z, vnc);
      _mm256_storeu_ps(yr + d, z);
    }
    for (; d < D; ++d) {
      float z = (xr[d] - mean[d]) * inv_std[d];
      if (z > clip) z = clip;
      if (z < -clip) z = -clip;
      yr[d] = z;
    }
  }
}

double sum_squares(const float* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
    acc0 = _mm256_fmadd_pd(lo, lo, acc0);
    acc1 = _mm256_fmadd_pd(hi, hi, acc1);
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d s = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  double total = _mm_cvtsd_f64(s);
  for (; i < n; ++i) {
    const double xi = static_cast<double>(x[i]);
    total += xi * xi;
  }
  return total;
}

}  // namespace pql::kernels::avx2

#endif  // x86-64
