#include "arefs/targets.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace arefs {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// bilinear periodic interpolation on a GridField
double bilinear(const GridField& f, Vec2 p) {
  const Grid2D& g = f.grid;
  double sx = (p.x - g.x0) / g.hx(), sy = (p.y - g.y0) / g.hy();
  double fx = std::floor(sx), fy = std::floor(sy);
  int i = int(fx), j = int(fy);
  double tx = sx - fx, ty = sy - fy;
  return (1 - tx) * (1 - ty) * f.atp(i, j) + tx * (1 - ty) * f.atp(i + 1, j) +
         (1 - tx) * ty * f.atp(i, j + 1) + tx * ty * f.atp(i + 1, j + 1);
}
}  // namespace

double Potential::U(Vec2 p) const {
  switch (family) {
    case Family::FlatTorus:
      return 0.0;
    case Family::TrigTorus: {
      double w = kTwoPi / side;
      return params[0] * std::cos(w * p.x) + params[1] * std::sin(w * p.y);
    }
    case Family::Gaussian: {
      double dx = p.x - params[0], dy = p.y - params[1];
      return dx * dx / (2 * params[2]) + dy * dy / (2 * params[3]);
    }
    case Family::DoubleWell: {
      double s = params[1], t = (p.x / s) * (p.x / s) - 1.0;
      return params[0] * t * t + 0.5 * p.y * p.y;
    }
    case Family::Tabulated:
      return bilinear(*table, p);
  }
  return 0.0;
}

Vec2 Potential::gradU(Vec2 p) const {
  switch (family) {
    case Family::FlatTorus:
      return {0.0, 0.0};
    case Family::TrigTorus: {
      double w = kTwoPi / side;
      return {-params[0] * w * std::sin(w * p.x),
              params[1] * w * std::cos(w * p.y)};
    }
    case Family::Gaussian:
      return {(p.x - params[0]) / params[2], (p.y - params[1]) / params[3]};
    case Family::DoubleWell: {
      double s = params[1], t = (p.x / s) * (p.x / s) - 1.0;
      return {params[0] * 4.0 * t * p.x / (s * s), p.y};
    }
    case Family::Tabulated: {
      double h = table->grid.hx();
      return {(bilinear(*table, {p.x + h, p.y}) -
               bilinear(*table, {p.x - h, p.y})) / (2 * h),
              (bilinear(*table, {p.x, p.y + h}) -
               bilinear(*table, {p.x, p.y - h})) / (2 * h)};
    }
  }
  return {0.0, 0.0};
}

double Potential::lapU(Vec2 p) const {
  switch (family) {
    case Family::FlatTorus:
      return 0.0;
    case Family::TrigTorus: {
      double w = kTwoPi / side;
      return -w * w * (params[0] * std::cos(w * p.x) +
                       params[1] * std::sin(w * p.y));
    }
    case Family::Gaussian:
      return 1.0 / params[2] + 1.0 / params[3];
    case Family::DoubleWell: {
      double s2 = params[1] * params[1];
      double x2 = p.x * p.x;
      return params[0] * (12.0 * x2 / (s2 * s2) - 4.0 / s2) + 1.0;
    }
    case Family::Tabulated: {
      double h = table->grid.hx();
      double c = bilinear(*table, p);
      return (bilinear(*table, {p.x + h, p.y}) +
              bilinear(*table, {p.x - h, p.y}) +
              bilinear(*table, {p.x, p.y + h}) +
              bilinear(*table, {p.x, p.y - h}) - 4 * c) / (h * h);
    }
  }
  return 0.0;
}

Potential flat_torus(double side) {
  Potential p;
  p.family = Family::FlatTorus;
  p.domain = Domain::Torus;
  p.side = side;
  return p;
}

Potential trig_torus(double cx, double cy, double side) {
  Potential p;
  p.family = Family::TrigTorus;
  p.domain = Domain::Torus;
  p.side = side;
  p.params = {cx, cy};
  return p;
}

Potential gaussian_potential(std::vector<double> mean,
                             std::vector<double> var) {
  if (mean.size() != 2 || var.size() != 2)
    throw std::invalid_argument("gaussian potential is 2-dimensional here");
  Potential p;
  p.family = Family::Gaussian;
  p.domain = Domain::Rd;
  p.params = {mean[0], mean[1], var[0], var[1]};
  return p;
}

Potential double_well(double height, double separation) {
  Potential p;
  p.family = Family::DoubleWell;
  p.domain = Domain::Rd;
  p.params = {height, separation};
  return p;
}

Potential tabulated_potential(GridField u_samples) {
  Potential p;
  p.family = Family::Tabulated;
  p.domain = Domain::Torus;
  p.side = u_samples.grid.Lx;
  p.origin = u_samples.grid.x0;
  p.table = std::make_shared<GridField>(std::move(u_samples));
  return p;
}

GridField TargetDensity::sample(const Grid2D& g) const {
  GridField f(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) f.at(i, j) = pi(g.node(i, j));
  return f;
}

TargetDensity normalize(const Potential& U, int resolution) {
  TargetDensity d;
  d.potential = U;
  if (U.domain == Domain::Torus) {
    Grid2D g = make_torus_grid(resolution, U.side, U.origin);
    double sum = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        sum += std::exp(-U.U(g.node(i, j)));
    d.log_normalizer = std::log(sum * g.cell_area());
    d.quad_grid = g;
    d.torus = true;
  } else {
    // grow the box until e^{-U} at the boundary is negligible
    double R = 4.0;
    for (int it = 0; it < 60; ++it) {
      double worst = 0.0;
      for (int k = 0; k < 256; ++k) {
        double th = kTwoPi * k / 256.0;
        double u = std::max(std::abs(std::cos(th)), std::abs(std::sin(th)));
        Vec2 p{R * std::cos(th) / u, R * std::sin(th) / u};  // on the square
        worst = std::max(worst, std::exp(-U.U(p)));
      }
      if (worst < 1e-16) break;
      R *= 1.25;
    }
    Grid2D g{resolution, resolution, -R, -R, 2 * R, 2 * R, false};
    double sum = 0.0;
    double h = g.hx();
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j <= g.ny; ++j) {
        double w = (i == 0 || i == g.nx ? 0.5 : 1.0) *
                   (j == 0 || j == g.ny ? 0.5 : 1.0);
        sum += w * std::exp(-U.U({g.x0 + i * h, g.y0 + j * h}));
      }
    if (!std::isfinite(sum) || sum <= 0.0)
      throw std::runtime_error("normalization quadrature failed");
    d.log_normalizer = std::log(sum * h * h);
    d.quad_grid = g;
    d.torus = false;
  }
  return d;
}

ConfiningReport confining_report(const Potential& U,
                                 std::vector<double> radii) {
  if (U.domain != Domain::Rd)
    throw std::invalid_argument("confining report needs an R^d potential");
  ConfiningReport rep;
  double Rmax = radii.back() * 3.0;
  for (double r : radii) {
    double inf = std::numeric_limits<double>::infinity();
    // golden-angle shell sampling between r and Rmax
    const int nr = 64, na = 128;
    for (int a = 0; a < na; ++a) {
      double th = kTwoPi * std::fmod(0.618033988749895 * a, 1.0);
      for (int k = 0; k < nr; ++k) {
        double rr = r + (Rmax - r) * (k + 0.5) / nr;
        Vec2 p{rr * std::cos(th), rr * std::sin(th)};
        Vec2 g = U.gradU(p);
        inf = std::min(inf, 0.5 * dot(g, g) - U.lapU(p));
      }
      Vec2 p{r * std::cos(th), r * std::sin(th)};  // include the shell floor
      Vec2 g = U.gradU(p);
      inf = std::min(inf, 0.5 * dot(g, g) - U.lapU(p));
    }
    rep.rows.push_back({r, inf});
  }
  rep.satisfied = true;
  for (size_t k = 1; k < rep.rows.size(); ++k)
    if (rep.rows[k].inf_value < rep.rows[k - 1].inf_value) rep.satisfied = false;
  if (rep.rows.empty() || rep.rows.back().inf_value <= 0.0)
    rep.satisfied = false;
  return rep;
}

namespace {
const char* family_name(Family f) {
  switch (f) {
    case Family::FlatTorus: return "flat-torus";
    case Family::TrigTorus: return "trig-torus";
    case Family::Gaussian: return "gaussian";
    case Family::DoubleWell: return "double-well";
    case Family::Tabulated: return "tabulated";
  }
  return "?";
}
Family family_from(const std::string& s) {
  if (s == "flat-torus") return Family::FlatTorus;
  if (s == "trig-torus") return Family::TrigTorus;
  if (s == "gaussian") return Family::Gaussian;
  if (s == "double-well") return Family::DoubleWell;
  if (s == "tabulated") return Family::Tabulated;
  throw std::invalid_argument("unknown potential family: " + s);
}
}  // namespace

nlohmann::json Potential::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family);
  j["domain"] = domain == Domain::Torus ? "T2" : "Rd";
  j["side"] = side;
  j["origin"] = origin;
  j["parameters"] = params;
  return j;
}

Potential Potential::from_json(const nlohmann::json& j) {
  Potential p;
  p.family = family_from(j.at("family").get<std::string>());
  p.domain = j.at("domain") == "T2" ? Domain::Torus : Domain::Rd;
  p.side = j.value("side", 1.0);
  p.origin = j.value("origin", 0.0);
  p.params = j.value("parameters", std::vector<double>{});
  if (p.family == Family::Tabulated)
    throw std::invalid_argument("tabulated potentials load via grid files");
  return p;
}

nlohmann::json TargetDensity::to_json() const {
  nlohmann::json j = potential.to_json();
  j["log_normalizer"] = log_normalizer;
  j["quadrature"] = {{"type", torus ? "rectangle" : "trapezoid"},
                     {"resolution", quad_grid.nx},
                     {"box", {quad_grid.x0, quad_grid.y0, quad_grid.Lx, quad_grid.Ly}}};
  return j;
}

TargetDensity TargetDensity::from_json(const nlohmann::json& j) {
  Potential p = Potential::from_json(j);
  return normalize(p, j.at("quadrature").at("resolution").get<int>());
}

void check_same_grid(const GridField& a, const GridField& b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("grid mismatch between fields");
}

void write_grid_field(const std::string& path, const GridField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  nlohmann::json hdr = {{"nx", f.grid.nx},
                        {"ny", f.grid.ny},
                        {"domain", {f.grid.x0, f.grid.y0, f.grid.Lx, f.grid.Ly}}};
  out << hdr.dump() << "\n";
  out.write(reinterpret_cast<const char*>(f.values.data()),
            std::streamsize(f.values.size() * sizeof(double)));
}

GridField read_grid_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  auto hdr = nlohmann::json::parse(line);
  Grid2D g;
  g.nx = hdr.at("nx");
  g.ny = hdr.at("ny");
  auto d = hdr.at("domain");
  g.x0 = d[0]; g.y0 = d[1]; g.Lx = d[2]; g.Ly = d[3];
  GridField f(g);
  in.read(reinterpret_cast<char*>(f.values.data()),
          std::streamsize(f.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("short grid-field payload in " + path);
  return f;
}

}  // namespace arefs
