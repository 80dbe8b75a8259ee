#include "arefs/flows.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "arefs/numutil.hpp"

namespace arefs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap(double x, double o, double L) {
  double t = std::fmod(x - o, L);
  if (t < 0) t += L;
  return o + t;
}

double psi_cell(int n, Vec2 p) {
  return std::sin(kTwoPi * n * p.x) * std::cos(kTwoPi * n * p.y);
}

Vec2 psi_cell_grad(int n, Vec2 p) {
  double w = kTwoPi * n;
  return {w * std::cos(w * p.x) * std::cos(w * p.y),
          -w * std::sin(w * p.x) * std::sin(w * p.y)};
}

// quintic smoothstep cutoff: 1 for r <= a, 0 for r >= b
double smooth_cutoff(double r, double a, double b) {
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  double s = (b - r) / (b - a);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

}  // namespace

StreamFunction cellular_stream(int n) {
  StreamFunction s;
  s.kind = StreamFunction::Kind::Cellular;
  s.n = n;
  s.eval = [n](Vec2 p) { return psi_cell(n, p); };
  s.grad = [n](Vec2 p) { return psi_cell_grad(n, p); };
  return s;
}

Flow cellular_flow(int n, std::shared_ptr<const TargetDensity> weight) {
  if (n < 1) throw std::invalid_argument("cellular flow needs n >= 1");
  if (weight->potential.family != Family::FlatTorus ||
      weight->potential.side != 1.0)
    throw std::invalid_argument(
        "cellular flow is defined against the flat unit-torus density; "
        "use pushforward_flow for other targets");
  Flow f;
  f.stream = cellular_stream(n);
  f.velocity = [n](Vec2 p) {
    Vec2 g = psi_cell_grad(n, p);
    return Vec2{-g.y, g.x};
  };
  f.weight = weight;
  f.weighted_stream = [n](Vec2 p) { return psi_cell(n, p); };
  f.cells = CellStructure{n, [](Vec2 p) { return p; }};
  f.energy = flow_energy(f, weight->quad_grid);
  return f;
}

Flow grad_perp_flow(std::shared_ptr<const TargetDensity> weight) {
  Flow f;
  f.weight = weight;
  auto pot = weight->potential;
  f.velocity = [pot](Vec2 p) {
    Vec2 g = pot.gradU(p);
    return Vec2{-g.y, g.x};
  };
  f.weighted_stream = [weight](Vec2 p) { return -weight->pi(p); };
  f.energy = flow_energy(f, weight->quad_grid);
  return f;
}

// ---------------------------------------------------------------------------
// transport maps

Vec2 TransportMap::forward(Vec2 u) const {
  double h = side / nx, hy = side / ny;
  double sx = (wrap(u.x, origin, side) - origin) / h;
  int k = std::min(int(sx), nx - 1);
  double tx = sx - k;
  int k1 = (k + 1) % nx;
  double Pk1 = P[k1] + (k + 1 == nx ? side : 0.0);
  double p = P[k] + tx * (Pk1 - P[k]);

  double sy = (wrap(u.y, origin, side) - origin) / hy;
  int j = std::min(int(sy), ny - 1);
  double ty = sy - j;
  auto col = [&](int i, int jj) {
    double base = (jj == ny) ? side : 0.0;
    return Q[size_t(i) * ny + (jj % ny)] + base;
  };
  auto qcol = [&](int i) {
    return col(i, j) + ty * (col(i, j + 1) - col(i, j));
  };
  double q = qcol(k) + tx * (qcol(k1) - qcol(k));
  return {p, q};
}

Vec2 TransportMap::inverse(Vec2 z) const {
  double h = side / nx;
  double p = wrap(z.x, origin, side);
  // binary search on P (P[0] = origin, increasing)
  int lo = 0, hi = nx;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    (P[mid] <= p ? lo : hi) = mid;
  }
  double Phi = (hi == nx) ? P[0] + side : P[hi];
  double tx = (p - P[lo]) / (Phi - P[lo]);
  double x = origin + h * (lo + tx);

  int k1 = (lo + 1) % nx;
  auto colv = [&](int jj) {
    double base = (jj == ny) ? side : 0.0;
    double a = Q[size_t(lo) * ny + (jj % ny)] + base;
    double b = Q[size_t(k1) * ny + (jj % ny)] + base;
    return a + tx * (b - a);
  };
  double q = wrap(z.y, origin, side);
  int jlo = 0, jhi = ny;
  while (jhi - jlo > 1) {
    int mid = (jlo + jhi) / 2;
    (colv(mid) <= q ? jlo : jhi) = mid;
  }
  double c0 = colv(jlo), c1 = colv(jhi);
  double ty = (q - c0) / (c1 - c0);
  double y = origin + (side / ny) * (jlo + ty);
  return {x, y};
}

TransportMap build_transport_map_fn(std::function<double(Vec2)> F,
                                    std::function<double(Vec2)> pi,
                                    double origin, double side, int nx,
                                    int ny) {
  TransportMap Z;
  Z.nx = nx;
  Z.ny = ny;
  Z.origin = origin;
  Z.side = side;
  Z.src_density = F;
  Z.tgt_density = pi;

  int osx = std::max(4, 8192 / nx), osy = std::max(4, 8192 / ny);
  int Mx = nx * osx, My = ny * osy;
  double dx = side / Mx, dy = side / My;

  // marginal CDFs of F and pi along the first axis
  auto marginal = [&](const std::function<double(Vec2)>& dens) {
    std::vector<double> m(Mx + 1);
    for (int k = 0; k <= Mx; ++k) {
      double x = origin + k * dx, acc = 0.0;
      for (int j = 0; j < My; ++j) acc += dens({x, origin + j * dy});
      m[k] = acc;
      if (!(m[k] > 0.0))
        throw std::runtime_error("transport map: density vanishes on a fiber");
    }
    return m;
  };
  std::vector<double> knots(Mx + 1);
  for (int k = 0; k <= Mx; ++k) knots[k] = origin + k * dx;
  auto Gbar = cumtrapz_cdf(marginal(F));
  auto Hbar = cumtrapz_cdf(marginal(pi));

  Z.P.resize(nx);
  for (int i = 0; i < nx; ++i)
    Z.P[i] = pwl_inverse(knots, Hbar, Gbar[size_t(i) * osx]);

  // per-column conditional CDFs
  std::vector<double> yknots(My + 1), gsamp(My + 1), hsamp(My + 1);
  for (int j = 0; j <= My; ++j) yknots[j] = origin + j * dy;
  Z.Q.resize(size_t(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    double x = origin + i * (side / nx), p = Z.P[i];
    for (int j = 0; j <= My; ++j) {
      gsamp[j] = F({x, yknots[j]});
      hsamp[j] = pi({p, yknots[j]});
    }
    auto G = cumtrapz_cdf(gsamp);
    auto H = cumtrapz_cdf(hsamp);
    for (int j = 0; j < ny; ++j)
      Z.Q[size_t(i) * ny + j] = pwl_inverse(yknots, H, G[size_t(j) * osy]);
  }
  return Z;
}

TransportMap build_transport_map(std::shared_ptr<const TargetDensity> F,
                                 std::shared_ptr<const TargetDensity> pi,
                                 int nx, int ny) {
  if (!F->torus || !pi->torus ||
      F->potential.side != pi->potential.side ||
      F->potential.origin != pi->potential.origin)
    throw std::invalid_argument("transport map needs two densities on the same torus");
  auto Z = build_transport_map_fn([F](Vec2 p) { return F->pi(p); },
                                  [pi](Vec2 p) { return pi->pi(p); },
                                  F->potential.origin, F->potential.side, nx, ny);
  Z.source = F;
  Z.target = pi;
  return Z;
}

double transport_jacobian_error(const TransportMap& Z) {
  int nx = Z.nx, ny = Z.ny;
  double h = Z.side / nx, hy = Z.side / ny;
  auto Pe = [&](int i) {  // periodic extension with winding
    int w = (i % nx + nx) % nx;
    return Z.P[w] + Z.side * std::floor(double(i) / nx);
  };
  auto Qe = [&](int i, int j) {
    int wi = (i % nx + nx) % nx;
    int wj = (j % ny + ny) % ny;
    return Z.Q[size_t(wi) * ny + wj] + Z.side * std::floor(double(j) / ny);
  };
  double worst = 0.0;
  for (int i = 0; i < nx; ++i) {
    double x = Z.origin + i * h;
    double dP = (8 * (Pe(i + 1) - Pe(i - 1)) - (Pe(i + 2) - Pe(i - 2))) / (12 * h);
    for (int j = 0; j < ny; ++j) {
      double y = Z.origin + j * hy;
      double dQ = (8 * (Qe(i, j + 1) - Qe(i, j - 1)) -
                   (Qe(i, j + 2) - Qe(i, j - 2))) / (12 * hy);
      Vec2 z{Z.P[i], Z.Q[size_t(i) * ny + j]};
      double r = dP * dQ * Z.tgt_density(z) - Z.src_density({x, y});
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

Flow pushforward_flow(const Flow& v, const TransportMap& Z) {
  if (Z.source && v.weight && !(v.weight->potential.family == Z.source->potential.family &&
        v.weight->log_normalizer == Z.source->log_normalizer))
    throw std::invalid_argument("pushforward: flow weight differs from map source");
  if (!v.weighted_stream)
    throw std::invalid_argument("pushforward implemented for streamfunction-backed flows");
  if (!Z.target)
    throw std::invalid_argument("pushforward needs a map with a target density");

  Flow out;
  out.weight = Z.target;
  auto Wsrc = v.weighted_stream;
  auto Zi = [Z](Vec2 p) { return Z.inverse(p); };
  auto Wbar = [Wsrc, Zi](Vec2 p) { return Wsrc(Zi(p)); };
  out.weighted_stream = Wbar;

  if (v.stream) {
    StreamFunction s;
    s.kind = StreamFunction::Kind::Tabulated;
    s.n = v.stream->n;
    auto inner = v.stream->eval;
    s.eval = [inner, Zi](Vec2 p) { return inner(Zi(p)); };
    double hs = Z.side / Z.nx;
    auto se = s.eval;
    s.grad = [se, hs](Vec2 p) {
      return Vec2{(se({p.x + hs, p.y}) - se({p.x - hs, p.y})) / (2 * hs),
                  (se({p.x, p.y + hs}) - se({p.x, p.y - hs})) / (2 * hs)};
    };
    out.stream = s;
  }
  if (v.cells) {
    auto pre = v.cells->preimage;
    out.cells = CellStructure{v.cells->n,
                              [pre, Zi](Vec2 p) { return pre(Zi(p)); }};
  }

  // 4th-order gradient of the carried weighted streamfunction, at the map's
  // own tabulation spacing
  double h = Z.side / Z.nx;
  auto tgt = Z.target;
  out.velocity = [Wbar, h, tgt](Vec2 p) {
    auto d4 = [&](bool ydir) {
      auto at = [&](double s) {
        return ydir ? Wbar({p.x, p.y + s}) : Wbar({p.x + s, p.y});
      };
      return (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    };
    double pi = tgt->pi(p);
    return Vec2{-d4(true) / pi, d4(false) / pi};
  };
  out.energy = flow_energy(out, Z.target->quad_grid);
  return out;
}

DivergenceReport weighted_divergence(const Flow& v, const Grid2D& grid) {
  if (grid.nx < 32 || grid.ny < 32)
    throw std::invalid_argument("divergence audit needs at least 32^2");
  GridField fx(grid), fy(grid);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      Vec2 p = grid.node(i, j);
      double pi = v.weight->pi(p);
      Vec2 u = v.velocity(p);
      fx.at(i, j) = pi * u.x;
      fy.at(i, j) = pi * u.y;
    }
  DivergenceReport rep;
  rep.residual = GridField(grid);
  double hx = grid.hx(), hy = grid.hy();
  double sumsq = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      double r = (fx.atp(i + 1, j) - fx.atp(i - 1, j)) / (2 * hx) +
                 (fy.atp(i, j + 1) - fy.atp(i, j - 1)) / (2 * hy);
      rep.residual.at(i, j) = r;
      rep.max_norm = std::max(rep.max_norm, std::abs(r));
      sumsq += r * r;
    }
  rep.l2_norm = std::sqrt(sumsq * grid.cell_area());
  return rep;
}

double flow_energy(const Flow& v, const Grid2D& grid) {
  double acc = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      Vec2 p = grid.node(i, j);
      if (v.support_radius > 0 && p.x * p.x + p.y * p.y >
              v.support_radius * v.support_radius)
        continue;
      Vec2 u = v.velocity(p);
      double s = dot(u, u) * v.weight->pi(p);
      if (!std::isfinite(s))
        throw std::runtime_error("flow energy: non-finite integrand at (" +
                                 fmt_double(p.x) + "," + fmt_double(p.y) + ")");
      acc += s;
    }
  return acc * grid.cell_area();
}

// ---------------------------------------------------------------------------
// full-space construction

FullspaceFlow build_fullspace_flow(std::shared_ptr<const TargetDensity> pi,
                                   int n, int phi, int table_res,
                                   int probe_res) {
  if (pi->torus)
    throw std::invalid_argument("full-space flow needs an R^2 target");
  auto conf = confining_report(pi->potential,
                               {0.5 * n, 1.0 * n, 2.0 * n, 3.0 * n});
  if (!conf.satisfied)
    throw std::invalid_argument("target tails too heavy for the construction");

  double side = 4.0 * n, orig = -2.0 * n;
  double ra = 1.5 * n, rb = 1.75 * n;

  // delta_n: grid infimum of pi over the enclosing square
  double delta = std::numeric_limits<double>::infinity();
  double hp = side / probe_res;
  for (int i = 0; i <= probe_res; ++i)
    for (int j = 0; j <= probe_res; ++j)
      delta = std::min(delta, pi->pi({orig + i * hp, orig + j * hp}));
  delta *= 0.5;

  auto chi = [ra, rb](Vec2 p) {
    return smooth_cutoff(std::hypot(p.x, p.y), ra, rb);
  };
  auto pin_raw = [pi, chi, delta](Vec2 p) {
    return (pi->pi(p) - delta) * chi(p) + delta;
  };
  double mass = 0.0;
  for (int i = 0; i < probe_res; ++i)
    for (int j = 0; j < probe_res; ++j)
      mass += pin_raw({orig + i * hp, orig + j * hp});
  double Mn = mass * hp * hp;

  auto pin = [pin_raw, Mn](Vec2 p) { return pin_raw(p) / Mn; };
  double uni = 1.0 / (side * side);
  TransportMap Z = build_transport_map_fn([uni](Vec2) { return uni; }, pin,
                                          orig, side, table_res, table_res);

  // Lipschitz constant of Z over the pullback of B(0, 3n/2), by
  // finite-difference stretch at the probe nodes
  double L = 0.0;
  {
    double eps = hp;
    for (int i = 0; i < probe_res; ++i)
      for (int j = 0; j < probe_res; ++j) {
        Vec2 u{orig + i * hp, orig + j * hp};
        Vec2 z = Z.forward(u);
        if (z.x * z.x + z.y * z.y > ra * ra) continue;
        for (int axis = 0; axis < 2; ++axis) {
          Vec2 u2 = axis ? Vec2{u.x, u.y + eps} : Vec2{u.x + eps, u.y};
          Vec2 z2 = Z.forward(u2);
          double dx = std::remainder(z2.x - z.x, side);
          double dy = std::remainder(z2.y - z.y, side);
          L = std::max(L, std::hypot(dx, dy) / eps);
        }
      }
  }
  int m0 = int(std::floor(std::sqrt(2.0) * L / n)) + 1;  // sqrt2/(2m) < n/(2L)

  CompactFlowSpec spec;
  spec.n = n;
  spec.m0 = m0;
  spec.phi_n = (phi <= 0) ? m0 : phi;
  if (spec.phi_n < m0) {
    spec.phi_n = m0;
    spec.phi_raised = true;
  }
  spec.inner_radius = ra;
  spec.outer_radius = rb;
  spec.delta_n = delta;
  spec.M_n = Mn;

  int ph = spec.phi_n;
  auto psi_prime = [Z, ph](Vec2 p) { return psi_cell(ph, Z.inverse(p)); };
  auto Wbar = [psi_prime, chi, Mn, rb](Vec2 p) {
    if (p.x * p.x + p.y * p.y >= rb * rb) return 0.0;
    return Mn * chi(p) * psi_prime(p);
  };

  Flow f;
  f.weight = pi;
  f.weighted_stream = Wbar;
  f.support_radius = 2.0 * n;
  {
    StreamFunction s;
    s.kind = StreamFunction::Kind::Tabulated;
    s.n = ph;
    s.eval = psi_prime;
    double hs = side / table_res;
    s.grad = [psi_prime, hs](Vec2 p) {
      return Vec2{(psi_prime({p.x + hs, p.y}) - psi_prime({p.x - hs, p.y})) / (2 * hs),
                  (psi_prime({p.x, p.y + hs}) - psi_prime({p.x, p.y - hs})) / (2 * hs)};
    };
    f.stream = s;
  }
  double h = side / table_res;
  f.velocity = [Wbar, h, pi, rb](Vec2 p) {
    if (p.x * p.x + p.y * p.y >= rb * rb) return Vec2{0.0, 0.0};
    auto d4 = [&](bool ydir) {
      auto at = [&](double s) {
        return ydir ? Wbar({p.x, p.y + s}) : Wbar({p.x + s, p.y});
      };
      return (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    };
    double w = pi->pi(p);
    return Vec2{-d4(true) / w, d4(false) / w};
  };
  {
    Grid2D box{probe_res, probe_res, orig, orig, side, side, false};
    f.energy = flow_energy(f, box);
  }

  FullspaceFlow out;
  out.flow = std::move(f);
  out.spec = spec;
  out.psi_prime = psi_prime;
  out.chi = chi;
  double cell = 1.0 / (2.0 * ph);
  out.in_D = [Z, cell, ra](Vec2 p) {
    Vec2 u = Z.inverse(p);
    double cx = std::floor(u.x / cell) * cell, cy = std::floor(u.y / cell) * cell;
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4; ++b) {
        if (a % 4 != 0 && b % 4 != 0) continue;  // boundary samples only
        Vec2 z = Z.forward({cx + cell * a / 4.0, cy + cell * b / 4.0});
        if (z.x * z.x + z.y * z.y > ra * ra) return false;
      }
    return true;
  };
  out.map = std::move(Z);
  return out;
}

nlohmann::json CompactFlowSpec::to_json() const {
  return {{"n", n},          {"phi_n", phi_n},   {"m0", m0},
          {"delta_n", delta_n}, {"M_n", M_n},
          {"radii", {inner_radius, outer_radius}},
          {"phi_raised", phi_raised}};
}

void TransportMap::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  nlohmann::json hdr = {{"nx", nx},
                        {"ny", ny},
                        {"origin", origin},
                        {"side", side},
                        {"source", source ? source->to_json() : nlohmann::json()},
                        {"target", target ? target->to_json() : nlohmann::json()}};
  out << hdr.dump() << "\n";
  out.write(reinterpret_cast<const char*>(P.data()),
            std::streamsize(P.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(Q.data()),
            std::streamsize(Q.size() * sizeof(double)));
}

TransportMap TransportMap::load(const std::string& path,
                                std::shared_ptr<const TargetDensity> src,
                                std::shared_ptr<const TargetDensity> tgt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  auto hdr = nlohmann::json::parse(line);
  TransportMap Z;
  Z.nx = hdr.at("nx");
  Z.ny = hdr.at("ny");
  Z.origin = hdr.at("origin");
  Z.side = hdr.at("side");
  Z.P.resize(Z.nx);
  Z.Q.resize(size_t(Z.nx) * Z.ny);
  in.read(reinterpret_cast<char*>(Z.P.data()),
          std::streamsize(Z.P.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(Z.Q.data()),
          std::streamsize(Z.Q.size() * sizeof(double)));
  if (!in) throw std::runtime_error("short transport-map payload in " + path);
  Z.source = src;
  Z.target = tgt;
  if (src) Z.src_density = [src](Vec2 p) { return src->pi(p); };
  if (tgt) Z.tgt_density = [tgt](Vec2 p) { return tgt->pi(p); };
  return Z;
}

}  // namespace arefs
