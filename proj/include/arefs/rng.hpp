#pragma once

#include <cmath>
#include <cstdint>

// Counter-based generator: every draw is a pure function of
// (seed, stream, step, counter), so particle trajectories are reproducible
// independent of evaluation order or partitioning.

namespace arefs {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct CounterRng {
  uint64_t seed = 0;

  uint64_t raw(uint64_t stream, uint64_t step, uint64_t ctr) const {
    uint64_t k = splitmix64(seed ^ 0x243f6a8885a308d3ull);
    k = splitmix64(k ^ stream);
    k = splitmix64(k ^ (step * 0x9e3779b97f4a7c15ull));
    return splitmix64(k ^ ctr);
  }
  // uniform in (0,1)
  double uniform(uint64_t stream, uint64_t step, uint64_t ctr) const {
    return (double(raw(stream, step, ctr) >> 11) + 0.5) * 0x1.0p-53;
  }
  // standard normal via Box-Muller; ctr selects the pair slot
  double normal(uint64_t stream, uint64_t step, uint64_t ctr) const {
    double u1 = uniform(stream, step, 2 * ctr);
    double u2 = uniform(stream, step, 2 * ctr + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

}  // namespace arefs
