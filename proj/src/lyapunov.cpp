#include "arefs/lyapunov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "arefs/rng.hpp"

namespace arefs {

namespace {

double rise(double t) {  // quintic smoothstep on [0,1]
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double rise_d(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return t * t * (30.0 + t * (-60.0 + 30.0 * t));
}

}  // namespace

LyapunovCertificate build_certificate(const Potential& pot, double delta) {
  if (pot.domain != Domain::Rd)
    throw std::invalid_argument("Lyapunov certificates target full-space potentials");
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("delta must lie in (0,1)");
  LyapunovCertificate c;
  c.potential = pot;
  c.delta = delta;
  c.W = [pot, delta](Vec2 x) { return std::exp(delta * pot.U(x)); };
  c.lambda = [pot, delta](Vec2 x) {
    Vec2 g = pot.gradU(x);
    return delta * (1.0 - delta) * dot(g, g) - delta * pot.lapU(x);
  };
  return c;
}

double LyapunovCertificate::lambda_floor(double r, double rmax, int shells,
                                         int per_shell) const {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < shells; ++i) {
    double rho = r + (rmax - r) * i / (shells - 1);
    for (int j = 0; j < per_shell; ++j) {
      double th = 2.0 * M_PI * (j + 0.5 * (i % 2)) / per_shell;
      lo = std::min(lo, lambda({rho * std::cos(th), rho * std::sin(th)}));
    }
  }
  return lo;
}

nlohmann::json LyapunovCertificate::to_json() const {
  nlohmann::json j;
  j["potential"] = potential.to_json();
  j["delta"] = delta;
  nlohmann::json prof = nlohmann::json::array();
  for (double r = 0.0; r <= 8.0; r += 0.5)
    prof.push_back({{"r", r}, {"lambda", lambda({r, 0.0})}});
  j["lambda_profile"] = prof;
  return j;
}

DriftReport verify_drift(const LyapunovCertificate& c, double rmax, int nr,
                         int ntheta) {
  DriftReport rep;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < ntheta; ++j) {
      double rho = rmax * (i + 1.0) / nr;
      double th = 2.0 * M_PI * (j + 0.3) / ntheta;
      Vec2 x{rho * std::cos(th), rho * std::sin(th)};
      // W varies like exp(delta U); shrink the stencil where the local
      // log-gradient is steep so truncation and roundoff stay balanced
      Vec2 gU = c.potential.gradU(x);
      double steep = c.delta * std::sqrt(dot(gU, gU));
      double h = 3.5e-3 / std::max(1.0, steep);
      auto Wd = [&](double dx, double dy) {
        return c.W({x.x + dx, x.y + dy});
      };
      double w0 = Wd(0, 0);
      double lap = 0.0;
      Vec2 grad;
      // fourth-order central stencils per axis
      lap += (-Wd(2 * h, 0) + 16 * Wd(h, 0) - 30 * w0 + 16 * Wd(-h, 0) -
              Wd(-2 * h, 0)) /
             (12 * h * h);
      lap += (-Wd(0, 2 * h) + 16 * Wd(0, h) - 30 * w0 + 16 * Wd(0, -h) -
              Wd(0, -2 * h)) /
             (12 * h * h);
      grad.x = (8 * (Wd(h, 0) - Wd(-h, 0)) - (Wd(2 * h, 0) - Wd(-2 * h, 0))) /
               (12 * h);
      grad.y = (8 * (Wd(0, h) - Wd(0, -h)) - (Wd(0, 2 * h) - Wd(0, -2 * h))) /
               (12 * h);
      double res = lap - dot(c.potential.gradU(x), grad) + c.lambda(x) * w0;
      rep.max_residual = std::max(rep.max_residual, std::abs(res));
      rep.max_W = std::max(rep.max_W, w0);
      ++rep.points;
    }
  return rep;
}

TailCheck tail_poincare_check(const LyapunovCertificate& c,
                              const TargetDensity& mu, double r, int trials,
                              uint64_t seed) {
  TailCheck out;
  out.r = r;
  out.trials = trials;
  double R = std::max(r + 6.0, 8.0);
  out.lambda_min = c.lambda_floor(r, 4.0 * R);

  const int G = 384;
  double h = 2.0 * R / G;
  CounterRng rng{seed};
  out.worst_quotient = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    double a[3], b[3];
    Vec2 w[3];
    for (int k = 0; k < 3; ++k) {
      a[k] = 2.0 * rng.uniform(t, 0, k) - 1.0;
      b[k] = 2.0 * rng.uniform(t, 1, k) - 1.0;
      w[k] = {6.0 * rng.uniform(t, 2, k) - 3.0,
              6.0 * rng.uniform(t, 3, k) - 3.0};
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j) {
        Vec2 x{-R + (i + 0.5) * h, -R + (j + 0.5) * h};
        double rho = std::hypot(x.x, x.y);
        if (rho <= r) continue;
        double cut = rise((rho - r) * 2.0);
        if (cut == 0.0) continue;
        double f = 0.0;
        Vec2 gf{0, 0};
        for (int k = 0; k < 3; ++k) {
          double ph = dot(w[k], x);
          f += a[k] * std::cos(ph) + b[k] * std::sin(ph);
          double df = -a[k] * std::sin(ph) + b[k] * std::cos(ph);
          gf = gf + df * w[k];
        }
        double dcut = rise_d((rho - r) * 2.0) * 2.0;
        Vec2 gg{dcut * x.x / rho * f + cut * gf.x,
                dcut * x.y / rho * f + cut * gf.y};
        double g = cut * f;
        double pi = mu.pi(x);
        num += dot(gg, gg) * pi;
        den += g * g * pi;
      }
    if (den <= 0.0) continue;
    out.worst_quotient = std::min(out.worst_quotient, num / den);
  }
  out.ok = out.worst_quotient >= out.lambda_min - 1e-6;
  return out;
}

}  // namespace arefs
