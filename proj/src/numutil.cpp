#include "arefs/numutil.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace arefs {

namespace {

// lower regularized gamma by series
double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// upper regularized gamma by Lentz continued fraction
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_pvalue(double stat, int dof) {
  return gamma_q(0.5 * dof, 0.5 * stat);
}

double bessel_i0(double x) {
  double t = x * x / 4.0, term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= t / (double(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

uint64_t fnv1a(const void* data, size_t n, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path);
  uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a(buf, size_t(in.gcount()), h);
  return h;
}

std::string fmt_double(double v) {
  char buf[40];
  snprintf(buf, sizeof buf, "%.17g", v);
  // try shorter forms that still round-trip
  for (int prec = 1; prec < 17; ++prec) {
    char s[40];
    snprintf(s, sizeof s, "%.*g", prec, v);
    if (std::strtod(s, nullptr) == v) return s;
  }
  return buf;
}

std::vector<double> cumtrapz_cdf(const std::vector<double>& dens) {
  size_t m = dens.size() - 1;
  std::vector<double> c(m + 1, 0.0);
  for (size_t k = 1; k <= m; ++k)
    c[k] = c[k - 1] + 0.5 * (dens[k - 1] + dens[k]);
  double total = c[m];
  if (!(total > 0.0)) throw std::runtime_error("degenerate density in CDF");
  for (auto& v : c) v /= total;
  c[m] = 1.0;
  return c;
}

double pwl_inverse(const std::vector<double>& u, const std::vector<double>& c,
                   double target) {
  size_t lo = 0, hi = c.size() - 1;
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    (c[mid] <= target ? lo : hi) = mid;
  }
  double dc = c[hi] - c[lo];
  double t = dc > 0.0 ? (target - c[lo]) / dc : 0.0;
  return u[lo] + t * (u[hi] - u[lo]);
}

double pwl_eval(const std::vector<double>& u, const std::vector<double>& c,
                double x) {
  size_t m = u.size() - 1;
  double du = (u[m] - u[0]) / double(m);
  double s = (x - u[0]) / du;
  if (s <= 0.0) return c[0];
  auto k = size_t(s);
  if (k >= m) return c[m];
  double t = s - double(k);
  return c[k] + t * (c[k + 1] - c[k]);
}

}  // namespace arefs
