#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "arefs/flows.hpp"
#include "arefs/targets.hpp"
#include <json.hpp>

// Spectral quantities of the weighted generator  L_A f = div(pi grad f)/pi
// + A v . grad f  on a periodic grid, assembled in the symmetrized frame
// x = sqrt(pi) f. The diffusion part becomes a symmetric positive
// semidefinite matrix Sw, the advection part an exactly skew matrix Tw, and
// the operator of interest is M_A = Sw + A Tw (sign flipped so decay rates
// are positive).

namespace arefs {

struct OperatorDiscretization {
  Grid2D grid;
  Eigen::VectorXd s;       // sqrt(pi) at nodes
  Eigen::VectorXd s_unit;  // normalized, spans the constant mode
  Eigen::SparseMatrix<double> Sw, Tw;
  double max_speed = 0.0;

  static OperatorDiscretization build(const TargetDensity& pi, const Flow* v,
                                      int N);
};

// smallest nonzero eigenvalue of Sw (weighted Poincare constant), by
// shifted inverse iteration with the constant mode deflated
double poincare_constant(const OperatorDiscretization& d);

struct GapResult {
  double re = 0.0, im = 0.0;
  double residual = 0.0;
};

// eigenvalue of M_A with smallest real part off the constant mode,
// by shift-and-invert Arnoldi
GapResult principal_gap(const OperatorDiscretization& d, double A,
                        double kappa_hint = 0.0);

struct PsiResult {
  double psi = 0.0;
  double lambda_star = 0.0;
};

// min over real frequencies of the smallest singular value of
// M_A - i*lambda on the mean-zero subspace; hints seed extra probe
// frequencies (e.g. imaginary parts of computed eigenvalues)
PsiResult psi_lower_bound(const OperatorDiscretization& d, double A,
                          double kappa_hint = 0.0,
                          const std::vector<double>& hints = {});

struct RvResult {
  double value = 0.0;  // +inf when the flow has no nonconstant invariants
  int basis_dim = 0;
  std::string method;
};

// Poincare constant restricted to invariants of the flow. Flows carrying a
// streamfunction and cell structure get a streamline-profile basis; others
// fall back to an SVD of Tw at reduced resolution.
RvResult r_of_v(const TargetDensity& pi, const Flow& v, int N);

// dense cross-checks (LAPACK), intended for small grids
double dense_poincare(const OperatorDiscretization& d);
GapResult dense_principal_gap(const OperatorDiscretization& d, double A);
// smallest deflated singular value of M_A - i*lambda for each given lambda
std::vector<double> dense_sigma_min(const OperatorDiscretization& d, double A,
                                    const std::vector<double>& lambdas);

struct SpectralReport {
  int grid = 0;
  double kappa = 0.0;
  struct MaRow {
    double A, re, im;
  };
  std::vector<MaRow> mA;
  struct PsiRow {
    double A, psi, lambda_star;
  };
  std::vector<PsiRow> psiA;
  RvResult rv;
  nlohmann::json to_json() const;
};

}  // namespace arefs
