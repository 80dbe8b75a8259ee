#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "arefs/flows.hpp"
#include "arefs/targets.hpp"

using namespace arefs;

namespace {
std::shared_ptr<const TargetDensity> flat() {
  static auto d =
      std::make_shared<TargetDensity>(normalize(flat_torus(1.0), 256));
  return d;
}
std::shared_ptr<const TargetDensity> trig() {
  static auto d =
      std::make_shared<TargetDensity>(normalize(trig_torus(0.5, 0.3), 1024));
  return d;
}
}  // namespace

TEST_CASE("cellular flow is weighted-divergence-free to rounding") {
  for (int n : {1, 2, 4}) {
    auto f = cellular_flow(n, flat());
    auto rep = weighted_divergence(f, make_torus_grid(128));
    CHECK(rep.max_norm < 1e-10);
    CHECK(f.energy == doctest::Approx(2.0 * M_PI * M_PI * n * n).epsilon(1e-10));
  }
}

TEST_CASE("cellular velocity matches the carried streamfunction") {
  auto f = cellular_flow(2, flat());
  REQUIRE(f.stream.has_value());
  // v = rot grad Psi against the flat weight
  double h = 1e-6;
  Vec2 p{0.31, 0.17};
  auto Psi = f.stream->eval;
  Vec2 v = f.velocity(p);
  CHECK(v.x == doctest::Approx(-(Psi({p.x, p.y + h}) - Psi({p.x, p.y - h})) /
                               (2 * h))
                   .epsilon(1e-6));
  CHECK(v.y == doctest::Approx((Psi({p.x + h, p.y}) - Psi({p.x - h, p.y})) /
                               (2 * h))
                   .epsilon(1e-6));
}

TEST_CASE("grad-perp flow is weighted-divergence-free for a non-flat weight") {
  auto f = grad_perp_flow(trig());
  auto rep = weighted_divergence(f, make_torus_grid(64));
  auto rep2 = weighted_divergence(f, make_torus_grid(128));
  // second-order residual, quartered when the mesh is halved
  CHECK(rep2.max_norm < rep.max_norm);
  CHECK(rep.max_norm / rep2.max_norm == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("transport map pushes the source density onto the target") {
  auto Z = build_transport_map(flat(), trig(), 256, 256);
  CHECK(transport_jacobian_error(Z) < 2e-5);

  // forward and inverse are mutual inverses up to table interpolation
  for (double x : {0.05, 0.37, 0.81})
    for (double y : {0.12, 0.5, 0.93}) {
      Vec2 p{x, y};
      Vec2 back = Z.inverse(Z.forward(p));
      CHECK(std::remainder(back.x - p.x, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(std::remainder(back.y - p.y, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("transport map save and load round trip") {
  auto Z = build_transport_map(flat(), trig(), 64, 64);
  std::string path = "tm_roundtrip.bin";
  Z.save(path);
  auto back = TransportMap::load(path, flat(), trig());
  std::remove(path.c_str());
  CHECK(back.nx == Z.nx);
  CHECK(back.P == Z.P);
  CHECK(back.Q == Z.Q);
  Vec2 a = Z.forward({0.3, 0.4}), b = back.forward({0.3, 0.4});
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("pushforward flow stays weighted-divergence-free at second order") {
  auto Z = build_transport_map(flat(), trig(), 1024, 1024);
  auto f = pushforward_flow(cellular_flow(1, flat()), Z);
  auto r1 = weighted_divergence(f, make_torus_grid(128));
  auto r2 = weighted_divergence(f, make_torus_grid(256));
  CHECK(r2.max_norm < r1.max_norm);
  CHECK(r1.max_norm / r2.max_norm == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("degenerate transport construction is rejected") {
  // a fiber of zero mass cannot be pushed anywhere
  auto zero_line = [](Vec2 p) {
    return std::max(0.0, std::sin(M_PI * p.x));  // vanishes on x = 0
  };
  CHECK_THROWS(build_transport_map_fn(
      [](Vec2) { return 1.0; }, zero_line, 0.0, 1.0, 64, 64));
}

TEST_CASE("full-space construction at a resolvable scale") {
  auto gauss = std::make_shared<TargetDensity>(
      normalize(gaussian_potential({0, 0}, {1, 1}), 512));
  auto full = build_fullspace_flow(gauss, 1, 0, 1024, 256);
  CHECK(full.spec.n == 1);
  CHECK(full.spec.phi_n >= full.spec.m0);
  CHECK(full.spec.M_n > 0.0);
  CHECK(full.spec.M_n <= 1.0);
  // velocity vanishes outside the cutoff annulus
  Vec2 far = full.flow.velocity({2.0, 0.5});
  CHECK(far.x == 0.0);
  CHECK(far.y == 0.0);
  // the conjugation region sits inside the inner ball
  CHECK(full.in_D({0.1, 0.2}));
  CHECK_FALSE(full.in_D({1.6, 0.0}));
  CHECK(full.flow.energy > 0.0);
}
