#include <immintrin.h>

#include "arefs/kernels.hpp"

namespace arefs::kernels {
namespace {

void flux_div_v(const double* fx, const double* fxm, const double* fy,
                const double* fym, double scale, double* out, size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(fx + k), _mm256_loadu_pd(fxm + k));
    d = _mm256_add_pd(d, _mm256_sub_pd(_mm256_loadu_pd(fy + k),
                                       _mm256_loadu_pd(fym + k)));
    _mm256_storeu_pd(out + k, _mm256_mul_pd(d, s));
  }
  for (; k < n; ++k) out[k] = (fx[k] - fxm[k] + fy[k] - fym[k]) * scale;
}

void face_flux_v(const double* w, const double* a, const double* b, double* f,
                 size_t n) {
  size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(b + k), _mm256_loadu_pd(a + k));
    _mm256_storeu_pd(f + k, _mm256_mul_pd(_mm256_loadu_pd(w + k), d));
  }
  for (; k < n; ++k) f[k] = w[k] * (b[k] - a[k]);
}

void adv_centered_v(const double* phi, const double* a, const double* b,
                    double* f, size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d m = _mm256_mul_pd(
        half, _mm256_add_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
    __m256d r = _mm256_sub_pd(_mm256_loadu_pd(f + k),
                              _mm256_mul_pd(_mm256_loadu_pd(phi + k), m));
    _mm256_storeu_pd(f + k, r);
  }
  for (; k < n; ++k) f[k] -= phi[k] * 0.5 * (a[k] + b[k]);
}

void adv_upwind_v(const double* phi, const double* a, const double* b,
                  double* f, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d p = _mm256_loadu_pd(phi + k);
    __m256d mask = _mm256_cmp_pd(p, zero, _CMP_GT_OQ);
    __m256d q = _mm256_blendv_pd(_mm256_loadu_pd(b + k),
                                 _mm256_loadu_pd(a + k), mask);
    _mm256_storeu_pd(f + k, _mm256_sub_pd(_mm256_loadu_pd(f + k),
                                          _mm256_mul_pd(p, q)));
  }
  for (; k < n; ++k) f[k] -= phi[k] * (phi[k] > 0.0 ? a[k] : b[k]);
}

void axpy_v(double s, const double* x, double* y, size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d r = _mm256_fmadd_pd(sv, _mm256_loadu_pd(x + k),
                                _mm256_loadu_pd(y + k));
    _mm256_storeu_pd(y + k, r);
  }
  for (; k < n; ++k) y[k] += s * x[k];
}

double wdot_v(const double* w, const double* x, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t k = 0;
  for (; k + 4 <= n; k += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + k), _mm256_loadu_pd(x + k), acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double s = lane[0] + lane[1] + lane[2] + lane[3];
  for (; k < n; ++k) s += w[k] * x[k];
  return s;
}

}  // namespace

const Dispatch avx2 = {flux_div_v, face_flux_v,  adv_centered_v,
                       adv_upwind_v, axpy_v, wdot_v, "avx2"};

}  // namespace arefs::kernels
