#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arefs/flows.hpp"
#include "arefs/grid.hpp"
#include "arefs/targets.hpp"

// Finite-volume evolution of the density ratio q = F/pi under
//   d(pi q)/dt = div(pi grad q) - A div(pi v q)
// on a periodic grid. Advective face fluxes come from corner samples of the
// flow's weighted streamfunction, so they telescope exactly: total mass is
// conserved to rounding and q == 1 is an exact steady state. Faces whose
// Peclet number exceeds 2 fall back from centered averaging to upwinding.

namespace arefs {

struct PdeOptions {
  double T = 0.1;
  double dt = 0.0;        // 0: choose from the stability bound
  int record_every = 0;   // 0: about 160 records over [0, T]
  bool force_upwind = false;
};

struct EvolutionRecord {
  struct Row {
    double t, H, fisher, rayleigh, hnorm, qmin, qmax, mass;
  };
  std::vector<Row> rows;

  double dt = 0.0;
  long steps = 0;
  int upwind_faces = 0;
  std::string kernel;

  double mass_drift = 0.0;            // max relative drift of total mass
  bool entropy_monotone = true;       // per step, slack 1e-9
  double max_dissipation_mismatch = 0.0;  // |dH/dt + fisher| / fisher, records
  double max_principle_violation = 0.0;   // excursion beyond initial [c1, c2]

  void write_csv(const std::string& path) const;
};

struct EvolveResult {
  GridField q;
  EvolutionRecord record;
};

// v may be null (pure diffusion) or A == 0; q0 lives on cell centers.
EvolveResult evolve(const GridField& q0, const TargetDensity& pi,
                    const Flow* v, double A, const PdeOptions& opt);

double entropy(const GridField& q, const TargetDensity& pi);
double fisher_information(const GridField& q, const TargetDensity& pi);

// largest stable step for the given setup, before the safety factor
double cfl_limit(const Grid2D& grid, const TargetDensity& pi, const Flow* v,
                 double A);

}  // namespace arefs
