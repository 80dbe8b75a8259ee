#pragma once

#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arefs/grid.hpp"

namespace arefs {

enum class Family { FlatTorus, TrigTorus, Gaussian, DoubleWell, Tabulated };
enum class Domain { Torus, Rd };

/// Parametric potential U with analytic U, grad U, Laplacian U.
/// Families:
///   flat-torus                      U = 0 on [0,L)^2
///   trig-torus(cx, cy)              U = cx cos(2pi x/L) + cy sin(2pi y/L)
///   gaussian(mean, diag covariance) U = sum (x_i-m_i)^2 / (2 s_i^2)
///   double-well(height, separation) U = H((x1/s)^2-1)^2 + x2^2/2
///   tabulated                       grid samples, bilinear interpolation
struct Potential {
  Family family = Family::FlatTorus;
  Domain domain = Domain::Torus;
  double side = 1.0;   // torus side length
  double origin = 0.0; // torus origin (same in both axes)
  int dim = 2;
  std::vector<double> params;
  std::shared_ptr<GridField> table;  // tabulated family only

  double U(Vec2 p) const;
  Vec2 gradU(Vec2 p) const;
  double lapU(Vec2 p) const;

  nlohmann::json to_json() const;
  static Potential from_json(const nlohmann::json& j);
};

Potential flat_torus(double side = 1.0);
Potential trig_torus(double cx, double cy, double side = 1.0);
Potential gaussian_potential(std::vector<double> mean, std::vector<double> var);
Potential double_well(double height, double separation);
Potential tabulated_potential(GridField u_samples);

/// Normalized density pi = e^{-U}/Z with its quadrature rule.
struct TargetDensity {
  Potential potential;
  double log_normalizer = 0.0;
  Grid2D quad_grid;       // torus grid, or Rd truncation-box grid
  bool torus = true;

  double pi(Vec2 p) const { return std::exp(-potential.U(p) - log_normalizer); }
  double log_pi(Vec2 p) const { return -potential.U(p) - log_normalizer; }
  double side() const { return potential.side; }

  // pi sampled at the nodes of g (defaults to quad_grid)
  GridField sample(const Grid2D& g) const;

  nlohmann::json to_json() const;
  static TargetDensity from_json(const nlohmann::json& j);
};

/// Torus: rectangle-rule quadrature at `resolution`^2 (spectrally accurate
/// for smooth periodic U). Rd: trapezoid on a truncation box auto-sized so
/// the boundary density is below 1e-16 of the peak.
TargetDensity normalize(const Potential& U, int resolution);

struct ConfiningRow {
  double r;
  double inf_value;  // inf_{|x|>=r} (|grad U|^2/2 - lap U)
};
struct ConfiningReport {
  std::vector<ConfiningRow> rows;
  bool satisfied;  // increasing and eventually positive
};
ConfiningReport confining_report(const Potential& U, std::vector<double> radii);

}  // namespace arefs
