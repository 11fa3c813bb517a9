// AVX2 kernel variants. This translation unit is compiled with
// -mavx2 -mfma; dispatch.cpp only routes here after a runtime CPUID check.
#include "uerw/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace uerw::simd::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, sh));
}

void linear_forward_avx2(const double* x, const double* w, const double* bias, double* y,
                         std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  const std::size_t in4 = in_dim & ~std::size_t(3);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x + b * in_dim;
    double* yb = y + b * out_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wo = w + o * in_dim;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t i = 0; i < in4; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(xb + i), _mm256_loadu_pd(wo + i), acc);
      double s = hsum(acc);
      for (std::size_t i = in4; i < in_dim; ++i) s += xb[i] * wo[i];
      yb[o] = bias ? s + bias[o] : s;
    }
  }
}

void linear_backprop_input_avx2(const double* dy, const double* w, double* dx,
                                std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  const std::size_t in4 = in_dim & ~std::size_t(3);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* dyb = dy + b * out_dim;
    double* dxb = dx + b * in_dim;
    for (std::size_t i = 0; i < in_dim; ++i) dxb[i] = 0.0;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const __m256d g = _mm256_set1_pd(dyb[o]);
      const double* wo = w + o * in_dim;
      for (std::size_t i = 0; i < in4; i += 4) {
        __m256d v = _mm256_fmadd_pd(g, _mm256_loadu_pd(wo + i), _mm256_loadu_pd(dxb + i));
        _mm256_storeu_pd(dxb + i, v);
      }
      const double gs = dyb[o];
      for (std::size_t i = in4; i < in_dim; ++i) dxb[i] += gs * wo[i];
    }
  }
}

void linear_backprop_params_avx2(const double* dy, const double* x, double* dw, double* db,
                                 std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  const std::size_t in4 = in_dim & ~std::size_t(3);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* dyb = dy + b * out_dim;
    const double* xb = x + b * in_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double gs = dyb[o];
      const __m256d g = _mm256_set1_pd(gs);
      double* dwo = dw + o * in_dim;
      for (std::size_t i = 0; i < in4; i += 4) {
        __m256d v = _mm256_fmadd_pd(g, _mm256_loadu_pd(xb + i), _mm256_loadu_pd(dwo + i));
        _mm256_storeu_pd(dwo + i, v);
      }
      for (std::size_t i = in4; i < in_dim; ++i) dwo[i] += gs * xb[i];
      if (db) db[o] += gs;
    }
  }
}

// mul/add only (no FMA) so the distance decisions are bit-identical to the
// scalar reference. Masked input falls back to the scalar kernel.
void capture_scan_avx2(const double* xs, const double* ys, const double* zs,
                       const std::uint8_t* mask, std::size_t n_points,
                       const double* tx, const double* ty, const double* tz,
                       std::size_t n_targets, double r2, std::uint8_t* reached) {
  if (mask) {
    scalar_table.capture_scan(xs, ys, zs, mask, n_points, tx, ty, tz, n_targets, r2, reached);
    return;
  }
  const std::size_t n4 = n_points & ~std::size_t(3);
  const __m256d vr2 = _mm256_set1_pd(r2);
  for (std::size_t t = 0; t < n_targets; ++t) {
    const __m256d cx = _mm256_set1_pd(tx[t]);
    const __m256d cy = _mm256_set1_pd(ty[t]);
    const __m256d cz = _mm256_set1_pd(tz[t]);
    std::uint8_t hit = 0;
    for (std::size_t p = 0; p < n4; p += 4) {
      const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + p), cx);
      const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + p), cy);
      const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + p), cz);
      const __m256d d2 = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
      if (_mm256_movemask_pd(_mm256_cmp_pd(d2, vr2, _CMP_LE_OQ))) {
        hit = 1;
        break;
      }
    }
    if (!hit) {
      const double scx = tx[t], scy = ty[t], scz = tz[t];
      for (std::size_t p = n4; p < n_points; ++p) {
        const double dx = xs[p] - scx;
        const double dy = ys[p] - scy;
        const double dz = zs[p] - scz;
        if (dx * dx + dy * dy + dz * dz <= r2) {
          hit = 1;
          break;
        }
      }
    }
    reached[t] = hit;
  }
}

}  // namespace

const KernelTable avx2_table = {
    linear_forward_avx2,
    linear_backprop_input_avx2,
    linear_backprop_params_avx2,
    capture_scan_avx2,
};

}  // namespace uerw::simd::detail

#else  // non-x86: route the avx2 table to the scalar kernels

namespace uerw::simd::detail {
const KernelTable avx2_table = scalar_table;
}

#endif
