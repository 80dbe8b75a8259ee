#include "arefs/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>
#include <lapacke.h>
#include <limits>
#include <stdexcept>

#include "arefs/rng.hpp"

namespace arefs {

namespace {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<cd>;

Eigen::VectorXd random_unit(int n, uint64_t stream) {
  CounterRng rng(0x5eedu);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal(stream, 0, i);
  return x.normalized();
}

void deflate(Eigen::VectorXd& x, const Eigen::VectorXd& su) {
  x -= su * su.dot(x);
}

void deflate(Eigen::VectorXcd& x, const Eigen::VectorXd& su) {
  x -= su.cast<cd>() * su.cast<cd>().dot(x);
}

double diag_scale(const SpMat& A) {
  return A.diagonal().cwiseAbs().mean();
}

// cubic B-spline bump, support (-2, 2)
double b3(double t) {
  t = std::abs(t);
  if (t >= 2.0) return 0.0;
  if (t >= 1.0) {
    double u = 2.0 - t;
    return u * u * u / 6.0;
  }
  return (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0;
}

}  // namespace

OperatorDiscretization OperatorDiscretization::build(const TargetDensity& pi,
                                                     const Flow* v, int N) {
  if (!pi.torus)
    throw std::invalid_argument("spectral discretization needs a torus target");
  OperatorDiscretization d;
  d.grid = make_torus_grid(N, pi.potential.side, pi.potential.origin);
  int M = N * N;
  double h = d.grid.hx();

  Eigen::VectorXd p(M);
  Eigen::MatrixXd vel(M, 2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      int k = i * N + j;
      Vec2 x = d.grid.node(i, j);
      p[k] = pi.pi(x);
      if (v) {
        Vec2 u = v->velocity(x);
        vel(k, 0) = u.x;
        vel(k, 1) = u.y;
        d.max_speed = std::max(d.max_speed, std::hypot(u.x, u.y));
      }
    }
  d.s = p.cwiseSqrt();
  d.s_unit = d.s.normalized();

  auto idx = [N](int i, int j) {
    return ((i + N) % N) * N + (j + N) % N;
  };
  std::vector<Eigen::Triplet<double>> ts, tt;
  ts.reserve(size_t(M) * 5);
  if (v) tt.reserve(size_t(M) * 4);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      int k = idx(i, j);
      double diag = 0.0;
      const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
      for (int q = 0; q < 4; ++q) {
        int l = idx(nb[q][0], nb[q][1]);
        double pf = 0.5 * (p[k] + p[l]);
        diag += pf / (p[k] * h * h);
        ts.emplace_back(k, l, -pf / (d.s[k] * d.s[l] * h * h));
        if (v) {
          int dir = q < 2 ? 0 : 1;
          double sign = (q % 2 == 0) ? 1.0 : -1.0;
          double c = sign *
                     (vel(k, dir) * d.s[k] / d.s[l] +
                      vel(l, dir) * d.s[l] / d.s[k]) /
                     (4.0 * h);
          tt.emplace_back(k, l, c);
        }
      }
      ts.emplace_back(k, k, diag);
    }
  d.Sw.resize(M, M);
  d.Sw.setFromTriplets(ts.begin(), ts.end());
  d.Tw.resize(M, M);
  if (v) d.Tw.setFromTriplets(tt.begin(), tt.end());
  return d;
}

double poincare_constant(const OperatorDiscretization& d) {
  int M = int(d.Sw.rows());
  SpMat K = d.Sw;
  double eps = 1e-8 * diag_scale(d.Sw);
  for (int k = 0; k < M; ++k) K.coeffRef(k, k) += eps;
  Eigen::SimplicialLDLT<SpMat> ldlt(K);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("diffusion operator factorization failed");

  Eigen::VectorXd x = random_unit(M, 1);
  deflate(x, d.s_unit);
  x.normalize();
  double lam = 0.0, prev = -1.0;
  for (int it = 0; it < 400; ++it) {
    Eigen::VectorXd y = ldlt.solve(x);
    deflate(y, d.s_unit);
    x = y.normalized();
    lam = x.dot(d.Sw * x);
    if (std::abs(lam - prev) < 1e-12 * std::abs(lam)) break;
    prev = lam;
  }
  return lam;
}

GapResult principal_gap(const OperatorDiscretization& d, double A,
                        double kappa_hint) {
  double kappa = kappa_hint > 0.0 ? kappa_hint : poincare_constant(d);
  int M = int(d.Sw.rows());
  SpMat Mat = d.Sw + A * d.Tw;
  SpMat shifted = Mat;
  double sigma = 0.76 * kappa;
  for (int k = 0; k < M; ++k) shifted.coeffRef(k, k) -= sigma;

  Eigen::SparseLU<SpMat> lu(shifted);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("shift-invert factorization failed");

  int m = std::min(120, M - 2);
  Eigen::MatrixXd V(M, m + 1), H = Eigen::MatrixXd::Zero(m + 1, m);
  {
    Eigen::VectorXd v0 = random_unit(M, 2);
    deflate(v0, d.s_unit);
    V.col(0) = v0.normalized();
  }
  int built = m;
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd w = lu.solve(V.col(k));
    deflate(w, d.s_unit);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= k; ++i) {
        double c = V.col(i).dot(w);
        w -= c * V.col(i);
        H(i, k) += c;
      }
    H(k + 1, k) = w.norm();
    if (H(k + 1, k) < 1e-12) {
      built = k + 1;
      break;
    }
    V.col(k + 1) = w / H(k + 1, k);
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(built, built));
  GapResult best;
  best.re = std::numeric_limits<double>::infinity();
  GapResult fallback = best;
  double fallback_res = std::numeric_limits<double>::infinity();
  for (int i = 0; i < built; ++i) {
    cd theta = es.eigenvalues()[i];
    if (std::abs(theta) < 1e-14) continue;
    cd mu = sigma + 1.0 / theta;
    Eigen::VectorXcd z =
        V.leftCols(built) * es.eigenvectors().col(i);
    z.normalize();
    Eigen::VectorXcd rz(M);
    rz.real() = Mat * z.real().eval();
    rz.imag() = Mat * z.imag().eval();
    double res = (rz - mu * z).norm() / (std::abs(mu) + 1.0);
    if (std::abs(d.s_unit.cast<cd>().dot(z)) > 0.1) continue;
    if (res < 1e-6 && mu.real() < best.re) {
      best = {mu.real(), mu.imag(), res};
    }
    if (res < fallback_res && mu.real() < fallback.re + 1e-9) {
      fallback = {mu.real(), mu.imag(), res};
      fallback_res = res;
    }
  }
  if (std::isfinite(best.re)) return best;
  if (fallback_res < 1e-3) return fallback;
  throw std::runtime_error("Arnoldi did not converge for the principal gap");
}

namespace {

// smallest singular value of M_A - i*lambda on the complement of the
// constant mode, via power iteration on the inverse normal matrix
double sigma_min_deflated(const SpMat& Mat, const Eigen::VectorXd& su,
                          double lambda) {
  int M = int(Mat.rows());
  SpMatC B = Mat.cast<cd>();
  for (int k = 0; k < M; ++k) B.coeffRef(k, k) -= cd(0.0, lambda);
  Eigen::SparseLU<SpMatC> lu(B);
  if (lu.info() != Eigen::Success) {
    for (int k = 0; k < M; ++k) B.coeffRef(k, k) -= cd(0.0, 1e-9 * (1 + lambda));
    lu.compute(B);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("frequency-shifted factorization failed");
  }
  Eigen::VectorXcd x = random_unit(M, 3).cast<cd>();
  deflate(x, su);
  x.normalize();
  double rho = 0.0, prev = -1.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXcd t = lu.adjoint().solve(x);
    deflate(t, su);
    Eigen::VectorXcd z = lu.solve(t);
    deflate(z, su);
    rho = z.dot(x).real();
    double nz = z.norm();
    if (nz == 0.0) break;
    x = z / nz;
    if (std::abs(rho - prev) < 1e-8 * std::abs(rho)) break;
    prev = rho;
  }
  return 1.0 / std::sqrt(std::max(rho, 1e-300));
}

}  // namespace

PsiResult psi_lower_bound(const OperatorDiscretization& d, double A,
                          double kappa_hint, const std::vector<double>& hints) {
  double kappa = kappa_hint > 0.0 ? kappa_hint : poincare_constant(d);
  SpMat Mat = d.Sw + A * d.Tw;
  double offset = 1e-6 * kappa;
  double lmax = 1.5 * A * d.max_speed + 10.0 * kappa;

  PsiResult best;
  best.psi = std::numeric_limits<double>::infinity();
  auto probe = [&](double lam) {
    lam = std::max(lam, offset);
    double s = sigma_min_deflated(Mat, d.s_unit, lam);
    if (s < best.psi) best = {s, lam};
  };
  const int J = 33;
  for (int j = 0; j < J; ++j) probe(lmax * j / (J - 1));
  double width = lmax / (J - 1);
  for (double hst : hints)
    for (int j = -2; j <= 2; ++j)
      probe(std::abs(hst) + 0.02 * std::abs(hst) * j);
  for (int round = 0; round < 2; ++round) {
    double center = best.lambda_star;
    for (int j = -4; j <= 4; ++j)
      if (j != 0) probe(center + width * j / 4.0);
    width /= 4.0;
  }
  return best;
}

RvResult r_of_v(const TargetDensity& pi, const Flow& v, int N) {
  if (v.stream && v.cells) {
    // profiles of the streamline first integral, per vortex cell, plus one
    // global profile hugging the separatrix; only Sw is needed
    auto d = OperatorDiscretization::build(pi, nullptr, N);
    int n = v.cells->n;
    int k = std::max(3, N / (4 * n));
    int ncells = 4 * n * n;
    int P = ncells * (k - 1) + 1;
    int M = N * N;

    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(M, P);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        int l = i * N + j;
        Vec2 x = d.grid.node(i, j);
        double u = std::abs(v.stream->eval(x));
        Vec2 pre = v.cells->preimage(x);
        auto fold = [n](double t) {
          int c = int(std::floor(t * 2 * n)) % (2 * n);
          return c < 0 ? c + 2 * n : c;
        };
        int c = fold(pre.x) * 2 * n + fold(pre.y + 0.25 / n);
        for (int m = 2; m <= k; ++m) {
          double val = b3(k * u - m);
          if (val != 0.0) V(l, c * (k - 1) + (m - 2)) = d.s[l] * val;
        }
        V(l, P - 1) = d.s[l] * b3(2.0 * k * u);
      }
    for (int c = 0; c < P; ++c) {
      Eigen::VectorXd col = V.col(c);
      deflate(col, d.s_unit);
      V.col(c) = col;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    qr.setThreshold(1e-10);
    int rank = int(qr.rank());
    if (rank == 0) throw std::runtime_error("degenerate streamline basis");
    Eigen::MatrixXd Q =
        Eigen::MatrixXd(qr.householderQ()).leftCols(rank);
    Eigen::MatrixXd Ared = Q.transpose() * (d.Sw * Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (Ared + Ared.transpose()));
    return {es.eigenvalues()[0], rank, "streamline"};
  }

  // no streamfunction: look for discrete invariants in the near-kernel of
  // the advection matrix at reduced resolution
  int Nr = std::min(N, 48);
  auto d = OperatorDiscretization::build(pi, &v, Nr);
  int M = Nr * Nr;
  double h = d.grid.hx();
  Eigen::MatrixXd T(d.Tw);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(T, Eigen::ComputeThinV);
  double thresh = 5.0 * h * h * svd.singularValues()[0];

  std::vector<Eigen::VectorXd> keep;
  for (int j = M - 1; j >= 0 && svd.singularValues()[j] < thresh; --j) {
    Eigen::VectorXd g = svd.matrixV().col(j);
    double rough = h * h * g.dot(d.Sw * g) / g.squaredNorm();
    if (rough >= 0.5) continue;
    deflate(g, d.s_unit);
    keep.push_back(g);
  }
  if (keep.empty())
    return {std::numeric_limits<double>::infinity(), 0, "kernel-svd"};
  Eigen::MatrixXd V(M, int(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) V.col(int(j)) = keep[j];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  qr.setThreshold(1e-8);
  int rank = int(qr.rank());
  if (rank == 0)
    return {std::numeric_limits<double>::infinity(), 0, "kernel-svd"};
  Eigen::MatrixXd Q = Eigen::MatrixXd(qr.householderQ()).leftCols(rank);
  Eigen::MatrixXd Ared = Q.transpose() * (d.Sw * Q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (Ared + Ared.transpose()));
  return {es.eigenvalues()[0], rank, "kernel-svd"};
}

// ---------------------------------------------------------------------------
// dense cross-checks

double dense_poincare(const OperatorDiscretization& d) {
  int M = int(d.Sw.rows());
  Eigen::MatrixXd A(d.Sw);
  double c = 10.0 * diag_scale(d.Sw);
  A += c * d.s_unit * d.s_unit.transpose();
  std::vector<double> w(M);
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', M, A.data(), M,
                            w.data());
  if (info != 0) throw std::runtime_error("dsyevd failed");
  return w[0];
}

GapResult dense_principal_gap(const OperatorDiscretization& d, double A) {
  int M = int(d.Sw.rows());
  Eigen::MatrixXd Mat(d.Sw + A * d.Tw);
  std::vector<double> wr(M), wi(M);
  Eigen::MatrixXd vr(M, M);
  int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', M, Mat.data(), M,
                           wr.data(), wi.data(), nullptr, M, vr.data(), M);
  if (info != 0) throw std::runtime_error("dgeev failed");
  GapResult best;
  best.re = std::numeric_limits<double>::infinity();
  for (int j = 0; j < M; ++j) {
    double overlap;
    if (wi[j] != 0.0) {
      // conjugate pair packed as adjacent columns
      double a = std::abs(d.s_unit.dot(vr.col(j)));
      double b = std::abs(d.s_unit.dot(vr.col(j + 1)));
      overlap = std::hypot(a, b);
      ++j;
    } else {
      overlap = std::abs(d.s_unit.dot(vr.col(j)));
    }
    if (overlap > 0.5) continue;
    int jj = (wi[j] != 0.0) ? j - 1 : j;
    if (wr[jj] < best.re) best = {wr[jj], std::abs(wi[jj]), 0.0};
  }
  return best;
}

std::vector<double> dense_sigma_min(const OperatorDiscretization& d, double A,
                                    const std::vector<double>& lambdas) {
  int M = int(d.Sw.rows());
  Eigen::MatrixXd Mat(d.Sw + A * d.Tw);
  double c = 10.0 * diag_scale(d.Sw) + A * d.max_speed;
  Eigen::MatrixXcd pen =
      c * (d.s_unit * d.s_unit.transpose()).cast<cd>();
  std::vector<double> out;
  std::vector<double> sv(M), superb(M);
  for (double lam : lambdas) {
    Eigen::MatrixXcd B = Mat.cast<cd>() + pen;
    for (int k = 0; k < M; ++k) B(k, k) -= cd(0.0, lam);
    int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', M, M,
                              reinterpret_cast<lapack_complex_double*>(B.data()),
                              M, sv.data(), nullptr, M, nullptr, M,
                              superb.data());
    if (info != 0) throw std::runtime_error("zgesvd failed");
    out.push_back(sv[M - 1]);
  }
  return out;
}

nlohmann::json SpectralReport::to_json() const {
  nlohmann::json j;
  j["grid"] = grid;
  j["kappa"] = kappa;
  j["mA"] = nlohmann::json::array();
  for (const auto& r : mA)
    j["mA"].push_back({{"A", r.A}, {"re", r.re}, {"im", r.im}});
  j["psiA"] = nlohmann::json::array();
  for (const auto& r : psiA)
    j["psiA"].push_back(
        {{"A", r.A}, {"psi", r.psi}, {"lambda_star", r.lambda_star}});
  j["rv"] = {{"value", std::isfinite(rv.value)
                           ? nlohmann::json(rv.value)
                           : nlohmann::json("inf")},
             {"basis_dim", rv.basis_dim},
             {"method", rv.method}};
  return j;
}

}  // namespace arefs
