#pragma once

#include <functional>

#include <json.hpp>

#include "arefs/targets.hpp"

// Exponential Lyapunov certificates W = exp(delta U) for the generator
// L0 = Laplacian - grad U . grad. The drift rate
//   lambda(x) = delta (1 - delta) |grad U|^2 - delta (Laplacian U)
// satisfies L0 W = -lambda W identically, and wherever lambda > 0 it gives a
// tail Poincare bound: functions supported outside a ball of radius r obey
// int |grad g|^2 dmu >= inf_{|x|>=r} lambda * int g^2 dmu.

namespace arefs {

struct LyapunovCertificate {
  Potential potential;
  double delta = 0.5;
  std::function<double(Vec2)> W;
  std::function<double(Vec2)> lambda;

  // infimum of lambda over |x| >= r, by shell sampling out to rmax
  double lambda_floor(double r, double rmax, int shells = 96,
                      int per_shell = 128) const;
  nlohmann::json to_json() const;
};

LyapunovCertificate build_certificate(const Potential& pot,
                                      double delta = 0.5);

struct DriftReport {
  double max_residual = 0.0;  // |L0 W + lambda W|, finite-difference L0
  double max_W = 0.0;
  int points = 0;
};

// applies a fourth-order finite-difference generator to W on a polar point
// set of radius <= rmax and compares against -lambda W
DriftReport verify_drift(const LyapunovCertificate& c, double rmax,
                         int nr = 24, int ntheta = 16);

struct TailCheck {
  double r = 0.0;
  double lambda_min = 0.0;
  double worst_quotient = 0.0;
  int trials = 0;
  bool ok = false;
};

// random smooth trial functions supported outside B(0, r): quotient
// int |grad g|^2 dmu / int g^2 dmu must clear the certified floor
TailCheck tail_poincare_check(const LyapunovCertificate& c,
                              const TargetDensity& mu, double r, int trials,
                              uint64_t seed);

}  // namespace arefs
