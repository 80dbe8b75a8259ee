#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace arefs {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Uniform nx-by-ny grid on [x0, x0+Lx) x [y0, y0+Ly); nodes at cell corners.
struct Grid2D {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0;
  double Lx = 1.0, Ly = 1.0;
  bool periodic = true;

  double hx() const { return Lx / nx; }
  double hy() const { return Ly / ny; }
  double cell_area() const { return hx() * hy(); }
  Vec2 node(int i, int j) const { return {x0 + i * hx(), y0 + j * hy()}; }
  int size() const { return nx * ny; }
  bool operator==(const Grid2D&) const = default;
};

inline Grid2D make_torus_grid(int n, double side = 1.0, double orig = 0.0) {
  if (n < 8) throw std::invalid_argument("grid resolution below 8");
  return Grid2D{n, n, orig, orig, side, side, true};
}

/// Periodic scalar field, row-major: values[i*ny + j].
struct GridField {
  Grid2D grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(const Grid2D& g) : grid(g), values(g.size(), 0.0) {}

  double& at(int i, int j) { return values[size_t(i) * grid.ny + j]; }
  double at(int i, int j) const { return values[size_t(i) * grid.ny + j]; }
  // periodic access
  double atp(int i, int j) const {
    int nx = grid.nx, ny = grid.ny;
    i %= nx; if (i < 0) i += nx;
    j %= ny; if (j < 0) j += ny;
    return values[size_t(i) * ny + j];
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

void check_same_grid(const GridField& a, const GridField& b);

// file format: one-line JSON header {nx,ny,domain} then raw LE float64, row-major
void write_grid_field(const std::string& path, const GridField& f);
GridField read_grid_field(const std::string& path);

}  // namespace arefs
