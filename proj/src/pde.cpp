#include "arefs/pde.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "arefs/kernels.hpp"
#include "arefs/numutil.hpp"

namespace arefs {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// faces and cell weights, assembled once per run
struct Disc {
  int N;
  double h, h2;
  std::vector<double> pi;        // cell centers
  std::vector<double> invpih2;   // 1 / (pi h^2)
  std::vector<double> pifx, pify;            // face weights
  std::vector<double> phixC, phixU, phiyC, phiyU;  // A * integrated pi*v flux
  int upwind_faces = 0;

  Disc(const Grid2D& g, const TargetDensity& dens, const Flow* v, double A,
       bool force_upwind) {
    if (g.nx != g.ny || !g.periodic)
      throw std::invalid_argument("evolve expects a square periodic grid");
    N = g.nx;
    h = g.hx();
    h2 = h * h;
    size_t M = size_t(N) * N;
    pi.resize(M);
    invpih2.resize(M);
    auto center = [&](int i, int j) {
      return Vec2{g.x0 + (i + 0.5) * h, g.y0 + (j + 0.5) * h};
    };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double p = dens.pi(center(i, j));
        pi[size_t(i) * N + j] = p;
        invpih2[size_t(i) * N + j] = 1.0 / (p * h2);
      }
    pifx.resize(M);
    pify.resize(M);
    auto P = [&](int i, int j) {
      return pi[size_t((i + N) % N) * N + (j + N) % N];
    };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        pifx[size_t(i) * N + j] = 0.5 * (P(i, j) + P(i + 1, j));
        pify[size_t(i) * N + j] = 0.5 * (P(i, j) + P(i, j + 1));
      }

    phixC.assign(M, 0.0);
    phixU.assign(M, 0.0);
    phiyC.assign(M, 0.0);
    phiyU.assign(M, 0.0);
    if (v && A != 0.0) {
      // corner samples of the weighted streamfunction; differencing them
      // along each face gives the exact integrated flux of pi*v through it
      std::vector<double> W(size_t(N) * N);
      bool have_stream = bool(v->weighted_stream);
      if (have_stream)
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j)
            W[size_t(i) * N + j] = v->weighted_stream(g.node(i, j));
      auto Wc = [&](int i, int j) {
        return W[size_t((i + N) % N) * N + (j + N) % N];
      };
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          double fx, fy;
          if (have_stream) {
            fx = A * (Wc(i + 1, j) - Wc(i + 1, j + 1));
            fy = A * (Wc(i + 1, j + 1) - Wc(i, j + 1));
          } else {
            Vec2 cx{g.x0 + (i + 1) * h, g.y0 + (j + 0.5) * h};
            Vec2 cy{g.x0 + (i + 0.5) * h, g.y0 + (j + 1) * h};
            fx = A * h * dens.pi(cx) * v->velocity(cx).x;
            fy = A * h * dens.pi(cy) * v->velocity(cy).y;
          }
          size_t k = size_t(i) * N + j;
          bool upx = force_upwind || std::abs(fx) > 4.0 * pifx[k];
          bool upy = force_upwind || std::abs(fy) > 4.0 * pify[k];
          (upx ? phixU : phixC)[k] = fx;
          (upy ? phiyU : phiyC)[k] = fy;
          upwind_faces += int(upx) + int(upy);
        }
    }
  }

  // rhs = [div of face fluxes] / (pi h^2)
  void rhs(const std::vector<double>& q, std::vector<double>& gx,
           std::vector<double>& gy, std::vector<double>& out) const {
    const auto& K = kernels::active();
    std::vector<double> qs(N), pad(size_t(N) + 1);
    for (int i = 0; i < N; ++i) {
      size_t r = size_t(i) * N, rn = size_t((i + 1) % N) * N;
      K.face_flux(&pifx[r], &q[r], &q[rn], &gx[r], N);
      K.adv_centered(&phixC[r], &q[r], &q[rn], &gx[r], N);
      K.adv_upwind(&phixU[r], &q[r], &q[rn], &gx[r], N);
      std::memcpy(qs.data(), &q[r + 1], (N - 1) * sizeof(double));
      qs[N - 1] = q[r];
      K.face_flux(&pify[r], &q[r], qs.data(), &gy[r], N);
      K.adv_centered(&phiyC[r], &q[r], qs.data(), &gy[r], N);
      K.adv_upwind(&phiyU[r], &q[r], qs.data(), &gy[r], N);
    }
    for (int i = 0; i < N; ++i) {
      size_t r = size_t(i) * N, rp = size_t((i + N - 1) % N) * N;
      pad[0] = gy[r + N - 1];
      std::memcpy(&pad[1], &gy[r], N * sizeof(double));
      K.flux_div(&gx[r], &gx[rp], &pad[1], &pad[0], 1.0, &out[r], N);
      for (int j = 0; j < N; ++j) out[r + j] *= invpih2[r + j];
    }
  }

  double stable_dt() const {
    double worst = 0.0;
    auto F = [&](const std::vector<double>& f, int i, int j) {
      return f[size_t((i + N) % N) * N + (j + N) % N];
    };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double s = F(pifx, i, j) + F(pifx, i - 1, j) + F(pify, i, j) +
                   F(pify, i, j - 1);
        for (const auto* a : {&phixC, &phixU})
          s += 0.5 * (std::abs(F(*a, i, j)) + std::abs(F(*a, i - 1, j)));
        for (const auto* a : {&phiyC, &phiyU})
          s += 0.5 * (std::abs(F(*a, i, j)) + std::abs(F(*a, i, j - 1)));
        worst = std::max(worst, s * invpih2[size_t(i) * N + j]);
      }
    return 1.0 / worst;
  }

  double stats(const std::vector<double>& q, double* fisher, double* hnorm,
               double* qmin, double* qmax, double* mass) const {
    double H = 0.0, m = 0.0, hn = 0.0, lo = q[0], hi = q[0];
    for (size_t k = 0; k < q.size(); ++k) {
      H += pi[k] * xlogx(q[k]);
      m += pi[k] * q[k];
      hn += pi[k] * (q[k] - 1.0) * (q[k] - 1.0);
      lo = std::min(lo, q[k]);
      hi = std::max(hi, q[k]);
    }
    if (mass) *mass = m * h2;
    if (hnorm) *hnorm = std::sqrt(hn * h2);
    if (qmin) *qmin = lo;
    if (qmax) *qmax = hi;
    if (fisher) {
      double F = 0.0;
      auto lg = [](double x) { return std::log(std::max(x, 1e-300)); };
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          size_t k = size_t(i) * N + j;
          double qa = q[k];
          double qx = q[size_t((i + 1) % N) * N + j];
          double qy = q[size_t(i) * N + (j + 1) % N];
          F += pifx[k] * (qx - qa) * (lg(qx) - lg(qa)) +
               pify[k] * (qy - qa) * (lg(qy) - lg(qa));
        }
      *fisher = F;
    }
    return H * h2;
  }
};

}  // namespace

double cfl_limit(const Grid2D& grid, const TargetDensity& pi, const Flow* v,
                 double A) {
  Disc d(grid, pi, v, A, false);
  return d.stable_dt();
}

double entropy(const GridField& q, const TargetDensity& pi) {
  Disc d(q.grid, pi, nullptr, 0.0, false);
  return d.stats(q.values, nullptr, nullptr, nullptr, nullptr, nullptr);
}

double fisher_information(const GridField& q, const TargetDensity& pi) {
  Disc d(q.grid, pi, nullptr, 0.0, false);
  double F = 0.0;
  d.stats(q.values, &F, nullptr, nullptr, nullptr, nullptr);
  return F;
}

EvolveResult evolve(const GridField& q0, const TargetDensity& pi,
                    const Flow* v, double A, const PdeOptions& opt) {
  Disc d(q0.grid, pi, v, A, opt.force_upwind);
  const auto& K = kernels::active();
  size_t M = q0.values.size();

  if (opt.dt > d.stable_dt())
    throw std::invalid_argument("explicit step exceeds the stability bound");
  double dt = opt.dt > 0.0 ? opt.dt : 0.45 * d.stable_dt();
  long steps = std::max(1L, long(std::ceil(opt.T / dt)));
  dt = opt.T / steps;
  int every = opt.record_every > 0 ? opt.record_every
                                   : std::max(1L, steps / 160);

  EvolveResult res;
  res.q = q0;
  auto& q = res.q.values;
  auto& rec = res.record;
  rec.dt = dt;
  rec.steps = steps;
  rec.upwind_faces = d.upwind_faces;
  rec.kernel = K.name;

  std::vector<double> r0(M), r1(M), q1(M), gx(M), gy(M);
  double c1, c2, mass0;
  double Hprev = d.stats(q, nullptr, nullptr, &c1, &c2, &mass0);

  auto record_row = [&](double t) {
    EvolutionRecord::Row row;
    row.t = t;
    row.H = d.stats(q, &row.fisher, &row.hnorm, &row.qmin, &row.qmax,
                    &row.mass);
    row.rayleigh = row.H > 1e-300 ? row.fisher / (2.0 * row.H) : 0.0;
    rec.rows.push_back(row);
    rec.mass_drift = std::max(rec.mass_drift,
                              std::abs(row.mass - mass0) / std::abs(mass0));
    rec.max_principle_violation =
        std::max({rec.max_principle_violation, c1 - row.qmin, row.qmax - c2});
  };
  record_row(0.0);

  for (long s = 0; s < steps; ++s) {
    d.rhs(q, gx, gy, r0);
    q1 = q;
    K.axpy(dt, r0.data(), q1.data(), M);
    d.rhs(q1, gx, gy, r1);
    K.axpy(0.5 * dt, r0.data(), q.data(), M);
    K.axpy(0.5 * dt, r1.data(), q.data(), M);

    double H = d.stats(q, nullptr, nullptr, nullptr, nullptr, nullptr);
    if (H > Hprev + 1e-9 * std::max(1.0, std::abs(Hprev)))
      rec.entropy_monotone = false;
    Hprev = H;
    if ((s + 1) % every == 0 || s + 1 == steps) record_row((s + 1) * dt);
  }

  // entropy production rate against the face-based Fisher information,
  // trapezoid between consecutive records
  double fmax = 0.0;
  for (const auto& r : rec.rows) fmax = std::max(fmax, r.fisher);
  for (size_t k = 1; k < rec.rows.size(); ++k) {
    const auto& a = rec.rows[k - 1];
    const auto& b = rec.rows[k];
    double fis = 0.5 * (a.fisher + b.fisher);
    if (fis < 1e-6 * fmax) continue;
    double lhs = (b.H - a.H) / (b.t - a.t);
    rec.max_dissipation_mismatch =
        std::max(rec.max_dissipation_mismatch, std::abs(lhs + fis) / fis);
  }
  return res;
}

void EvolutionRecord::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,H,fisher,rayleigh,hnorm,qmin,qmax,mass\n";
  for (const auto& r : rows)
    out << fmt_double(r.t) << ',' << fmt_double(r.H) << ','
        << fmt_double(r.fisher) << ',' << fmt_double(r.rayleigh) << ','
        << fmt_double(r.hnorm) << ',' << fmt_double(r.qmin) << ','
        << fmt_double(r.qmax) << ',' << fmt_double(r.mass) << '\n';
}

}  // namespace arefs
