#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "arefs/flows.hpp"
#include "arefs/spectral.hpp"

using namespace arefs;

namespace {
std::shared_ptr<const TargetDensity> flat(double side = 1.0) {
  return std::make_shared<TargetDensity>(normalize(flat_torus(side), 256));
}
}  // namespace

TEST_CASE("poincare constant of the flat side-2 torus is pi^2") {
  auto d2 = flat(2.0);
  auto disc = OperatorDiscretization::build(*d2, nullptr, 48);
  double kappa = poincare_constant(disc);
  CHECK(kappa == doctest::Approx(M_PI * M_PI).epsilon(0.005));
}

TEST_CASE("advection matrix is exactly skew") {
  auto f = cellular_flow(1, flat());
  auto disc = OperatorDiscretization::build(*flat(), &f, 32);
  Eigen::MatrixXd T = Eigen::MatrixXd(disc.Tw);
  CHECK((T + T.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // and the diffusion matrix is symmetric PSD on the mean-zero space
  Eigen::MatrixXd S = Eigen::MatrixXd(disc.Sw);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("iterative eigensolves agree with dense oracles") {
  auto f = cellular_flow(1, flat());
  auto disc = OperatorDiscretization::build(*flat(), &f, 24);
  double ki = poincare_constant(disc);
  double kd = dense_poincare(disc);
  CHECK(ki == doctest::Approx(kd).epsilon(1e-8));
  for (double A : {0.0, 8.0, 64.0}) {
    auto gi = principal_gap(disc, A, ki);
    auto gd = dense_principal_gap(disc, A);
    CHECK(gi.re == doctest::Approx(gd.re).epsilon(1e-6));
    CHECK(std::abs(gi.im) == doctest::Approx(std::abs(gd.im)).epsilon(1e-6));
  }
}

TEST_CASE("frequency sweep lower bound brackets the gap") {
  auto f = cellular_flow(1, flat());
  auto disc = OperatorDiscretization::build(*flat(), &f, 24);
  double kappa = poincare_constant(disc);
  for (double A : {0.0, 8.0, 64.0}) {
    auto g = principal_gap(disc, A, kappa);
    std::vector<double> hints;
    if (std::abs(g.im) > 1e-12) hints.push_back(g.im);
    auto p = psi_lower_bound(disc, A, kappa, hints);
    CHECK(p.psi >= kappa * (1.0 - 1e-6));
    CHECK(p.psi <= g.re * (1.0 + 1e-6));
  }
}

TEST_CASE("gap grows with the advection strength") {
  auto f = cellular_flow(1, flat());
  auto disc = OperatorDiscretization::build(*flat(), &f, 32);
  double kappa = poincare_constant(disc);
  double prev = 0.0;
  for (double A : {0.0, 8.0, 64.0, 512.0}) {
    auto g = principal_gap(disc, A, kappa);
    CHECK(g.re >= prev - 1e-9);
    prev = g.re;
  }
}

TEST_CASE("streamline basis value approaches the continuum constant") {
  // continuum invariant-subspace constant for the single-cell flow
  auto rv = r_of_v(*flat(), cellular_flow(1, flat()), 64);
  CHECK(rv.method == "streamline");
  CHECK(rv.value == doctest::Approx(78.92).epsilon(0.06));
  // and it always dominates the unrestricted constant
  auto disc = OperatorDiscretization::build(*flat(), nullptr, 64);
  CHECK(rv.value >= poincare_constant(disc));
}

TEST_CASE("flows without nonconstant invariants give an infinite value") {
  Flow shear;
  shear.weight = flat();
  shear.velocity = [](Vec2) { return Vec2{1.0, 1.6180339887498949}; };
  shear.energy = 1.0;
  auto rv = r_of_v(*flat(), shear, 48);
  CHECK(std::isinf(rv.value));
  CHECK(rv.basis_dim == 0);
}
