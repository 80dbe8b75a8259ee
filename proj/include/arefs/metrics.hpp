#pragma once

#include <vector>

#include "arefs/grid.hpp"
#include "arefs/targets.hpp"

namespace arefs {

// grid densities are node samples on the same grid, assumed normalized
double kl_grid(const GridField& f, const GridField& g);
double tv_grid(const GridField& f, const GridField& g);  // int |f - g|

// binned plug-in KL(samples || ref) with the Miller-Madow bias correction
double kl_empirical(const std::vector<Vec2>& xs, const TargetDensity& ref,
                    int nbins);

struct Chi2Result {
  double stat = 0.0;
  int dof = 0;
  double pvalue = 0.0;
};
// goodness of fit on an nbins x nbins spatial partition; cells with
// expected count below 5 are pooled
Chi2Result chi2_gof(const std::vector<Vec2>& xs, const TargetDensity& ref,
                    int nbins);

// order-p Wasserstein distance between equal-size samples: exact optimal
// assignment up to exact_threshold points, sliced (128 directions) beyond
double wasserstein(std::vector<Vec2> a, std::vector<Vec2> b, int p,
                   int exact_threshold = 1024);

// Gaussian-integrability constant 2 inf_a sqrt((1 + log E exp(a|x|^2))/(2a));
// +inf when no squared-exponential moment exists
double ckp_constant(const TargetDensity& nu);

}  // namespace arefs
