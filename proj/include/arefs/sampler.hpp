#pragma once

#include <string>
#include <vector>

#include "arefs/flows.hpp"
#include "arefs/targets.hpp"

// Euler-Maruyama integration of  dX = (A v(X) - grad U(X)) dt + sqrt(2) dB.
// Noise is counter-based per (particle, step), so runs are reproducible for
// a given seed regardless of batching.

namespace arefs {

struct ParticleSet {
  std::vector<Vec2> x;
};

struct SimOptions {
  double dt = 1e-3;
  double T = 1.0;
  uint64_t seed = 1;
  uint64_t stream = 0;       // offsets particle ids between independent runs
  double escape_radius = 0.0;  // full space only; 0 disables the check
  int record_every = 0;        // 0: about 100 mean snapshots
  uint64_t step0 = 0;  // noise-counter offset, for continuing a run in segments
};

struct SimResult {
  ParticleSet final;
  std::vector<double> times;
  std::vector<Vec2> means;
  long escaped = 0;  // particles frozen after leaving the escape radius
};

SimResult simulate(const TargetDensity& target, const Flow* v, double A,
                   const ParticleSet& init, const SimOptions& opt);

// exact draws: direct for Gaussian targets, rejection from a uniform box or
// torus proposal otherwise
ParticleSet sample_target(const TargetDensity& target, int n, uint64_t seed,
                          uint64_t stream = 0);

ParticleSet shifted_by(const ParticleSet& p, Vec2 m);

// one-line JSON header, then raw little-endian xy pairs
void write_particles(const std::string& path, const ParticleSet& p);
ParticleSet read_particles(const std::string& path);

}  // namespace arefs
