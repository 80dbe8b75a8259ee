#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "arefs/flows.hpp"
#include "arefs/pde.hpp"

using namespace arefs;

namespace {
std::shared_ptr<const TargetDensity> flat() {
  static auto d =
      std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
  return d;
}

GridField centered(const Grid2D& g, double (*f)(double, double)) {
  GridField q(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      q.at(i, j) = f(g.x0 + (i + 0.5) * g.hx(), g.y0 + (j + 0.5) * g.hy());
  return q;
}
}  // namespace

TEST_CASE("uniform ratio is an exact steady state") {
  Grid2D g = make_torus_grid(32);
  GridField q(g);
  for (auto& v : q.values) v = 1.0;
  auto f = cellular_flow(2, flat());
  PdeOptions opt;
  opt.T = 0.01;
  auto r = evolve(q, *flat(), &f, 50.0, opt);
  for (double v : r.q.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("heat mode decays at the continuum rate") {
  Grid2D g = make_torus_grid(64);
  auto q0 = centered(g, [](double x, double) {
    return 1.0 + 0.5 * std::cos(2 * M_PI * x);
  });
  PdeOptions opt;
  opt.T = 0.01;
  auto r = evolve(q0, *flat(), nullptr, 0.0, opt);
  double amp = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      amp += r.q.at(i, j) * std::cos(2 * M_PI * (i + 0.5) / 64.0);
  amp *= 2.0 / (64.0 * 64.0);
  CHECK(amp == doctest::Approx(0.5 * std::exp(-4 * M_PI * M_PI * 0.01))
                   .epsilon(2e-3));
}

TEST_CASE("mass, entropy, and extrema are controlled") {
  Grid2D g = make_torus_grid(48);
  auto q0 = centered(g, [](double x, double y) {
    return 1.0 + 0.4 * std::cos(2 * M_PI * x) * std::sin(2 * M_PI * y);
  });
  auto f = cellular_flow(1, flat());
  PdeOptions opt;
  opt.T = 0.02;
  auto r = evolve(q0, *flat(), &f, 30.0, opt);
  CHECK(r.record.mass_drift < 1e-10);
  CHECK(r.record.entropy_monotone);
  CHECK(r.record.max_principle_violation < 1e-8);
  // dissipation identity for this centered run
  CHECK(r.record.upwind_faces == 0);
  CHECK(r.record.max_dissipation_mismatch < 0.05);
}

TEST_CASE("strong advection falls back to upwinding and stays stable") {
  Grid2D g = make_torus_grid(32);
  auto q0 = centered(g, [](double x, double y) {
    return 1.0 + 0.3 * std::sin(2 * M_PI * (x + y));
  });
  auto f = cellular_flow(1, flat());
  PdeOptions opt;
  opt.T = 1e-3;
  auto r = evolve(q0, *flat(), &f, 4000.0, opt);
  CHECK(r.record.upwind_faces > 0);
  CHECK(r.record.mass_drift < 1e-10);
  CHECK(r.record.entropy_monotone);
  CHECK(r.record.max_principle_violation < 1e-6);
}

TEST_CASE("entropy functional matches its quadrature definition") {
  Grid2D g = make_torus_grid(32);
  auto q = centered(g, [](double x, double) {
    return 1.0 + 0.2 * std::cos(2 * M_PI * x);
  });
  double H = entropy(q, *flat());
  double ref = 0.0;
  for (double v : q.values) ref += v * std::log(v) - v + 1.0;
  // pi = 1, cell area 1/32^2; the affine part integrates to zero only in
  // the continuum, so compare against the same discrete sum
  double ref2 = 0.0;
  for (double v : q.values) ref2 += v * std::log(v);
  ref2 /= 32.0 * 32.0;
  CHECK(H == doctest::Approx(ref2).epsilon(1e-12));
  CHECK(fisher_information(q, *flat()) > 0.0);
}

TEST_CASE("explicit step above the stability bound is rejected") {
  Grid2D g = make_torus_grid(32);
  double bound = cfl_limit(g, *flat(), nullptr, 0.0);
  CHECK(bound > 0.0);
  GridField q(g);
  for (auto& v : q.values) v = 1.0;
  PdeOptions opt;
  opt.T = 0.01;
  opt.dt = 4.0 * bound;
  CHECK_THROWS(evolve(q, *flat(), nullptr, 0.0, opt));
}
