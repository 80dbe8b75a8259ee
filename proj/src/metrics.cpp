#include "arefs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "arefs/numutil.hpp"

namespace arefs {

namespace {

// expected bin masses on an nb x nb partition of the quadrature box,
// 4x4 midpoint quadrature per bin
std::vector<double> bin_masses(const TargetDensity& ref, int nb) {
  const Grid2D& g = ref.quad_grid;
  std::vector<double> q(size_t(nb) * nb, 0.0);
  double bx = g.Lx / nb, by = g.Ly / nb;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          acc += ref.pi({g.x0 + (i + (a + 0.5) / 4.0) * bx,
                         g.y0 + (j + (b + 0.5) / 4.0) * by});
      q[size_t(i) * nb + j] = acc * bx * by / 16.0;
    }
  return q;
}

// bin index, with out-of-box samples mapped to -1 (full space) or wrapped
// (torus)
int bin_of(const TargetDensity& ref, Vec2 p, int nb) {
  const Grid2D& g = ref.quad_grid;
  double tx = (p.x - g.x0) / g.Lx, ty = (p.y - g.y0) / g.Ly;
  if (ref.torus) {
    tx -= std::floor(tx);
    ty -= std::floor(ty);
  } else if (tx < 0.0 || tx >= 1.0 || ty < 0.0 || ty >= 1.0) {
    return -1;
  }
  int i = std::min(int(tx * nb), nb - 1);
  int j = std::min(int(ty * nb), nb - 1);
  return i * nb + j;
}

}  // namespace

double kl_grid(const GridField& f, const GridField& g) {
  check_same_grid(f, g);
  double acc = 0.0;
  for (size_t k = 0; k < f.values.size(); ++k) {
    double a = f.values[k], b = g.values[k];
    if (a <= 0.0) continue;
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    acc += a * std::log(a / b);
  }
  return acc * f.grid.cell_area();
}

double tv_grid(const GridField& f, const GridField& g) {
  check_same_grid(f, g);
  double acc = 0.0;
  for (size_t k = 0; k < f.values.size(); ++k)
    acc += std::abs(f.values[k] - g.values[k]);
  return acc * f.grid.cell_area();
}

double kl_empirical(const std::vector<Vec2>& xs, const TargetDensity& ref,
                    int nbins) {
  auto q = bin_masses(ref, nbins);
  std::vector<long> counts(q.size(), 0);
  long outside = 0;
  for (auto& p : xs) {
    int b = bin_of(ref, p, nbins);
    if (b < 0)
      ++outside;
    else
      ++counts[b];
  }
  double n = double(xs.size());
  double kl = 0.0;
  long occupied = 0;
  for (size_t b = 0; b < q.size(); ++b) {
    if (counts[b] == 0) continue;
    ++occupied;
    double ph = counts[b] / n;
    kl += ph * std::log(ph / std::max(q[b], 1e-300));
  }
  if (outside > 0) kl += (outside / n) * std::log((outside / n) / 1e-300);
  kl -= (occupied - 1) / (2.0 * n);  // plug-in bias, first order
  return kl;
}

Chi2Result chi2_gof(const std::vector<Vec2>& xs, const TargetDensity& ref,
                    int nbins) {
  auto q = bin_masses(ref, nbins);
  std::vector<long> counts(q.size(), 0);
  long pooled_count = 0;
  for (auto& p : xs) {
    int b = bin_of(ref, p, nbins);
    if (b < 0)
      ++pooled_count;
    else
      ++counts[b];
  }
  double n = double(xs.size());
  double pooled_q = std::max(0.0, 1.0 - std::accumulate(q.begin(), q.end(), 0.0));
  Chi2Result r;
  int cells = 0;
  for (size_t b = 0; b < q.size(); ++b) {
    double e = n * q[b];
    if (e < 5.0) {
      pooled_q += q[b];
      pooled_count += counts[b];
      continue;
    }
    double d = counts[b] - e;
    r.stat += d * d / e;
    ++cells;
  }
  double ep = n * pooled_q;
  if (ep >= 5.0) {
    double d = pooled_count - ep;
    r.stat += d * d / ep;
    ++cells;
  }
  r.dof = cells - 1;
  r.pvalue = chi2_pvalue(r.stat, r.dof);
  return r;
}

namespace {

// dense optimal assignment by successive shortest augmenting paths
double assignment_cost(const std::vector<double>& C, int n) {
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), INF);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = INF;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = C[size_t(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    total += C[size_t(p[j] - 1) * n + (j - 1)];
  return total;
}

}  // namespace

double wasserstein(std::vector<Vec2> a, std::vector<Vec2> b, int p,
                   int exact_threshold) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("wasserstein needs equal nonempty samples");
  if (p != 1 && p != 2) throw std::invalid_argument("order must be 1 or 2");
  int n = int(a.size());

  if (n <= exact_threshold) {
    std::vector<double> C(size_t(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double d = std::hypot(a[i].x - b[j].x, a[i].y - b[j].y);
        C[size_t(i) * n + j] = p == 1 ? d : d * d;
      }
    double total = assignment_cost(C, n) / n;
    return p == 1 ? total : std::sqrt(total);
  }

  const int K = 128;
  std::vector<double> pa(n), pb(n);
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    double th = M_PI * k / K;
    double cx = std::cos(th), cy = std::sin(th);
    for (int i = 0; i < n; ++i) {
      pa[i] = cx * a[i].x + cy * a[i].y;
      pb[i] = cx * b[i].x + cy * b[i].y;
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = std::abs(pa[i] - pb[i]);
      s += p == 1 ? d : d * d;
    }
    acc += s / n;
  }
  acc /= K;
  return p == 1 ? acc : std::sqrt(acc);
}

double ckp_constant(const TargetDensity& nu) {
  const Grid2D& g = nu.quad_grid;
  // extended box, to see whether the integrand is still decaying
  double cx = g.x0 + 0.5 * g.Lx, cy = g.y0 + 0.5 * g.Ly;
  double R = std::max(g.Lx, g.Ly);

  auto log_mgf = [&](double alpha, bool* feasible) {
    const int G = 384;
    double h = 2.0 * R / G;
    double inner = 0.0, ring = 0.0;
    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j) {
        Vec2 x{cx - R + (i + 0.5) * h, cy - R + (j + 0.5) * h};
        double val = std::exp(alpha * (x.x * x.x + x.y * x.y) + nu.log_pi(x));
        bool in_base = std::abs(x.x - cx) < 0.5 * g.Lx &&
                       std::abs(x.y - cy) < 0.5 * g.Ly;
        (in_base ? inner : ring) += val;
      }
    double total = (inner + ring) * h * h;
    *feasible = ring <= 1e-9 * (inner + ring) && std::isfinite(total);
    return std::log(total);
  };

  auto objective = [&](double alpha, bool* feasible) {
    double G0 = log_mgf(alpha, feasible);
    return 2.0 * std::sqrt(std::max(0.0, 1.0 + G0) / (2.0 * alpha));
  };

  double best = std::numeric_limits<double>::infinity(), best_a = 0.0;
  for (int k = 0; k < 60; ++k) {
    double alpha = std::exp(std::log(1e-3) +
                            (std::log(20.0) - std::log(1e-3)) * k / 59.0);
    bool ok;
    double f = objective(alpha, &ok);
    if (!ok) break;  // heavier alphas only diverge faster
    if (f < best) {
      best = f;
      best_a = alpha;
    }
  }
  if (!std::isfinite(best)) return best;
  // golden-section polish around the grid minimum
  double lo = best_a / 1.6, hi = best_a * 1.6;
  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  bool ok;
  double f1 = objective(x1, &ok), f2 = objective(x2, &ok);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1, &ok);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2, &ok);
    }
  }
  return std::min({best, f1, f2});
}

}  // namespace arefs
