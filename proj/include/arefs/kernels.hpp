#pragma once

#include <cstddef>

// Hot inner loops of the PDE right-hand side and weighted reductions.
// Scalar reference implementations plus AVX2 variants selected once at
// startup from CPUID; both compiled unconditionally, equivalence-tested.

namespace arefs::kernels {

struct Dispatch {
  // out[k] = (fx[k] - fxm[k] + fy[k] - fym[k]) * scale   (flux divergence row)
  void (*flux_div)(const double* fx, const double* fxm, const double* fy,
                   const double* fym, double scale, double* out, size_t n);
  // diffusive face flux along a row: f[k] = w[k]*(b[k]-a[k])
  void (*face_flux)(const double* w, const double* a, const double* b,
                    double* f, size_t n);
  // advective face flux, centered: f[k] -= phi[k]*0.5*(a[k]+b[k])
  void (*adv_centered)(const double* phi, const double* a, const double* b,
                       double* f, size_t n);
  // advective face flux, upwind:  f[k] -= phi[k]>0 ? phi[k]*a[k] : phi[k]*b[k]
  void (*adv_upwind)(const double* phi, const double* a, const double* b,
                     double* f, size_t n);
  // y[k] += s*x[k]
  void (*axpy)(double s, const double* x, double* y, size_t n);
  // sum w[k]*x[k]
  double (*wdot)(const double* w, const double* x, size_t n);
  const char* name;
};

extern const Dispatch scalar;
extern const Dispatch avx2;

// runtime-selected active set (scalar unless AVX2 is available)
const Dispatch& active();

}  // namespace arefs::kernels
