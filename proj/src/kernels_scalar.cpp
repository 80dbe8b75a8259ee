#include "arefs/kernels.hpp"

namespace arefs::kernels {
namespace {

void flux_div_s(const double* fx, const double* fxm, const double* fy,
                const double* fym, double scale, double* out, size_t n) {
  for (size_t k = 0; k < n; ++k)
    out[k] = (fx[k] - fxm[k] + fy[k] - fym[k]) * scale;
}

void face_flux_s(const double* w, const double* a, const double* b, double* f,
                 size_t n) {
  for (size_t k = 0; k < n; ++k) f[k] = w[k] * (b[k] - a[k]);
}

void adv_centered_s(const double* phi, const double* a, const double* b,
                    double* f, size_t n) {
  for (size_t k = 0; k < n; ++k) f[k] -= phi[k] * 0.5 * (a[k] + b[k]);
}

void adv_upwind_s(const double* phi, const double* a, const double* b,
                  double* f, size_t n) {
  for (size_t k = 0; k < n; ++k) f[k] -= phi[k] * (phi[k] > 0.0 ? a[k] : b[k]);
}

void axpy_s(double s, const double* x, double* y, size_t n) {
  for (size_t k = 0; k < n; ++k) y[k] += s * x[k];
}

double wdot_s(const double* w, const double* x, size_t n) {
  double acc = 0.0;
  for (size_t k = 0; k < n; ++k) acc += w[k] * x[k];
  return acc;
}

}  // namespace

const Dispatch scalar = {flux_div_s, face_flux_s,  adv_centered_s,
                         adv_upwind_s, axpy_s, wdot_s, "scalar"};

}  // namespace arefs::kernels
