#include "arefs/sampler.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "arefs/numutil.hpp"
#include "arefs/rng.hpp"
#include <json.hpp>

namespace arefs {

SimResult simulate(const TargetDensity& target, const Flow* v, double A,
                   const ParticleSet& init, const SimOptions& opt) {
  SimResult res;
  res.final = init;
  auto& xs = res.final.x;
  size_t n = xs.size();
  long steps = std::max(1L, long(std::llround(opt.T / opt.dt)));
  double dt = opt.T / steps;
  int every = opt.record_every > 0 ? opt.record_every
                                   : int(std::max(1L, steps / 100));
  CounterRng rng{opt.seed};
  double sq = std::sqrt(2.0 * dt);
  bool torus = target.torus;
  double L = target.potential.side, o = target.potential.origin;
  std::vector<char> dead(n, 0);

  auto record = [&](double t) {
    Vec2 m{0, 0};
    for (auto& p : xs) m = m + p;
    res.times.push_back(t);
    res.means.push_back((1.0 / double(n)) * m);
  };
  record(0.0);

  for (long s = 0; s < steps; ++s) {
    for (size_t i = 0; i < n; ++i) {
      if (dead[i]) continue;
      Vec2 p = xs[i];
      Vec2 drift = -1.0 * target.potential.gradU(p);
      if (v && A != 0.0) drift = drift + A * v->velocity(p);
      uint64_t pid = opt.stream * 0x100000000ull + i;
      p = p + dt * drift +
          sq * Vec2{rng.normal(pid, opt.step0 + uint64_t(s), 0),
                    rng.normal(pid, opt.step0 + uint64_t(s), 1)};
      if (torus) {
        p.x = o + std::fmod(std::fmod(p.x - o, L) + L, L);
        p.y = o + std::fmod(std::fmod(p.y - o, L) + L, L);
      } else if (opt.escape_radius > 0.0 &&
                 p.x * p.x + p.y * p.y >
                     opt.escape_radius * opt.escape_radius) {
        dead[i] = 1;
        ++res.escaped;
      }
      xs[i] = p;
    }
    if ((s + 1) % every == 0 || s + 1 == steps) record((s + 1) * dt);
  }
  return res;
}

ParticleSet sample_target(const TargetDensity& target, int n, uint64_t seed,
                          uint64_t stream) {
  CounterRng rng{seed};
  ParticleSet out;
  out.x.reserve(n);

  if (target.potential.family == Family::Gaussian) {
    const auto& q = target.potential.params;
    double sx = std::sqrt(q.at(2)), sy = std::sqrt(q.at(3));
    for (int i = 0; i < n; ++i)
      out.x.push_back({q[0] + sx * rng.normal(stream, i, 0),
                       q[1] + sy * rng.normal(stream, i, 1)});
    return out;
  }

  // rejection from the uniform proposal on the quadrature box / torus
  const Grid2D& g = target.quad_grid;
  double cap = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      cap = std::max(cap, target.pi(g.node(i, j)));
  cap *= 1.1;
  uint64_t ctr = 0;
  while (int(out.x.size()) < n) {
    Vec2 p{g.x0 + g.Lx * rng.uniform(stream, 1, ctr),
           g.y0 + g.Ly * rng.uniform(stream, 1, ctr + 1)};
    double u = rng.uniform(stream, 1, ctr + 2);
    ctr += 3;
    if (u * cap <= target.pi(p)) out.x.push_back(p);
    if (ctr > 3000ull * uint64_t(n) + 3000000ull)
      throw std::runtime_error("rejection sampler stalled; density too peaked");
  }
  return out;
}

ParticleSet shifted_by(const ParticleSet& p, Vec2 m) {
  ParticleSet out = p;
  for (auto& x : out.x) x = x + m;
  return out;
}

void write_particles(const std::string& path, const ParticleSet& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  nlohmann::json hdr = {{"count", p.x.size()}, {"layout", "xy-f64"}};
  out << hdr.dump() << "\n";
  out.write(reinterpret_cast<const char*>(p.x.data()),
            std::streamsize(p.x.size() * sizeof(Vec2)));
}

ParticleSet read_particles(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  auto hdr = nlohmann::json::parse(line);
  ParticleSet p;
  p.x.resize(hdr.at("count").get<size_t>());
  in.read(reinterpret_cast<char*>(p.x.data()),
          std::streamsize(p.x.size() * sizeof(Vec2)));
  if (!in) throw std::runtime_error("short particle payload in " + path);
  return p;
}

}  // namespace arefs
