#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "arefs/targets.hpp"

namespace arefs {

struct StreamFunction {
  enum class Kind { Cellular, Tabulated } kind = Kind::Cellular;
  int n = 1;                                   // cellular cell count
  std::function<double(Vec2)> eval;            // Psi
  std::function<Vec2(Vec2)> grad;              // grad Psi (cellular: analytic)
};

StreamFunction cellular_stream(int n);

/// Coordinates of the underlying cellular flow for streamline analysis:
/// preimage maps a point to unit-torus coordinates in which the carried
/// streamfunction is exactly sin(2pi n x)cos(2pi n y).
struct CellStructure {
  int n = 1;
  std::function<Vec2(Vec2)> preimage;
};

struct Flow {
  std::function<Vec2(Vec2)> velocity;
  std::shared_ptr<const TargetDensity> weight;
  std::optional<StreamFunction> stream;
  // W with pi*v = curl(W) = (-dW/dy, dW/dx); exact for all built-in flows
  std::function<double(Vec2)> weighted_stream;
  std::optional<CellStructure> cells;
  double support_radius = -1.0;  // <0: whole domain
  double energy = 0.0;
};

Flow cellular_flow(int n, std::shared_ptr<const TargetDensity> weight);

// v = rot grad U; weighted-divergence-free against e^{-U} for any U, with
// weighted streamfunction -pi (gaussian target: rigid rotation)
Flow grad_perp_flow(std::shared_ptr<const TargetDensity> weight);

struct TransportMap {
  std::shared_ptr<const TargetDensity> source, target;
  // kept separately so maps built from raw densities stay checkable
  std::function<double(Vec2)> src_density, tgt_density;
  int nx = 0, ny = 0;
  double origin = 0.0, side = 1.0;
  std::vector<double> P;  // length nx, nodes x_i = origin + i*side/nx
  std::vector<double> Q;  // row-major nx*ny; Q[i*ny+j] = Q(x_i, y_j)

  Vec2 forward(Vec2 u) const;
  Vec2 inverse(Vec2 z) const;

  void save(const std::string& path) const;
  static TransportMap load(const std::string& path,
                           std::shared_ptr<const TargetDensity> src,
                           std::shared_ptr<const TargetDensity> tgt);
};

TransportMap build_transport_map(std::shared_ptr<const TargetDensity> F,
                                 std::shared_ptr<const TargetDensity> pi,
                                 int nx, int ny);

// map construction from raw densities on a torus (used internally and by
// the full-space builder, where the intermediate density has no Potential)
TransportMap build_transport_map_fn(std::function<double(Vec2)> F,
                                    std::function<double(Vec2)> pi,
                                    double origin, double side, int nx, int ny);

Flow pushforward_flow(const Flow& v, const TransportMap& Z);

struct DivergenceReport {
  GridField residual;
  double max_norm = 0.0;
  double l2_norm = 0.0;
};
DivergenceReport weighted_divergence(const Flow& v, const Grid2D& grid);

double flow_energy(const Flow& v, const Grid2D& grid);

struct CompactFlowSpec {
  int n = 1;
  int phi_n = 1;
  int m0 = 1;          // computed covering bound
  double inner_radius = 0.0, outer_radius = 0.0;
  double delta_n = 0.0;
  double M_n = 1.0;
  bool phi_raised = false;  // requested phi was below m0
  nlohmann::json to_json() const;
};

struct FullspaceFlow {
  Flow flow;
  CompactFlowSpec spec;
  TransportMap map;                       // uniform -> pi_n on [-2n,2n)^2
  std::function<double(Vec2)> psi_prime;  // Psi_phi o Z^-1
  std::function<double(Vec2)> chi;        // radial cutoff
  std::function<bool(Vec2)> in_D;         // inside the conjugation region
};

FullspaceFlow build_fullspace_flow(std::shared_ptr<const TargetDensity> pi,
                                   int n, int phi = 0 /* 0 = auto */,
                                   int table_res = 1024, int probe_res = 512);

// max |det DZ * pi(Z) - F| at the table nodes (4th-order differences of
// the tabulated map)
double transport_jacobian_error(const TransportMap& Z);

}  // namespace arefs
