#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "arefs/lyapunov.hpp"

using namespace arefs;

TEST_CASE("gaussian certificate has the closed-form rate") {
  auto c = build_certificate(gaussian_potential({0, 0}, {1, 1}), 0.5);
  // delta(1-delta)|x|^2 - 2 delta = r^2/4 - 1
  CHECK(c.lambda({2.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(c.lambda({0.0, 4.0}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(c.lambda({6.0, 8.0}) == doctest::Approx(24.0).epsilon(1e-14));
  CHECK(c.W({0.0, 0.0}) == 1.0);
  CHECK(c.lambda_floor(4.0, 8.0) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("drift identity holds under an independent finite-difference check") {
  auto c = build_certificate(gaussian_potential({0, 0}, {1, 1}), 0.5);
  auto rep = verify_drift(c, 6.0);
  CHECK(rep.points > 0);
  CHECK(rep.max_residual <= 1e-8 * rep.max_W);

  auto cw = build_certificate(double_well(1.0, 1.0), 0.3);
  auto rw = verify_drift(cw, 3.0);
  CHECK(rw.max_residual <= 1e-6 * rw.max_W);
}

TEST_CASE("random tail trials respect the certified floor") {
  auto mu = normalize(gaussian_potential({0, 0}, {1, 1}), 512);
  auto c = build_certificate(mu.potential, 0.5);
  for (double r : {3.0, 5.0}) {
    auto tc = tail_poincare_check(c, mu, r, 60, 7);
    CHECK(tc.ok);
    CHECK(tc.worst_quotient >= tc.lambda_min - 1e-6);
  }
}

TEST_CASE("invalid certificates are rejected") {
  CHECK_THROWS(build_certificate(flat_torus(1.0), 0.5));
  CHECK_THROWS(build_certificate(gaussian_potential({0, 0}, {1, 1}), 0.0));
  CHECK_THROWS(build_certificate(gaussian_potential({0, 0}, {1, 1}), 1.0));
}
