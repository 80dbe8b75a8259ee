#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace arefs {

// regularized upper incomplete gamma Q(a,x); chi-square tail probability
double gamma_q(double a, double x);
double chi2_pvalue(double stat, int dof);

// modified Bessel I0 (power series; adequate for |x| <= ~15)
double bessel_i0(double x);

double normal_cdf(double x);

// FNV-1a over bytes, for output manifests
uint64_t fnv1a(const void* data, size_t n, uint64_t seed = 1469598103934665603ull);
uint64_t fnv1a_file(const std::string& path);

// shortest round-trip decimal form of a double (deterministic output)
std::string fmt_double(double v);

// cumulative trapezoid CDF of a 1D periodic density sampled at m+1 points
// on [0,L]; returns normalized CDF values (c[0]=0, c[m]=1)
std::vector<double> cumtrapz_cdf(const std::vector<double>& dens);

// monotone piecewise-linear inverse: given sorted knots (u_k, c_k) with c
// increasing, evaluate u(c*) by binary search + linear interpolation
double pwl_inverse(const std::vector<double>& u, const std::vector<double>& c,
                   double target);
double pwl_eval(const std::vector<double>& u, const std::vector<double>& c,
                double x);  // forward interp of c(u) at x, u uniform knots

}  // namespace arefs
