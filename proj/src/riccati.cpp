#include "kfbound/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kfbound {

namespace {

constexpr double kZeroRRankTol = 1e-10;
constexpr double kZeroRCrossCheckTol = 1e-4;
constexpr double kSteinResidualTol = 1e-10;
constexpr int kMaxSquarings = 100;

Eigen::LLT<Matrix> factor_pd(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(linalg::symmetrize(m));
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument(std::string(what) + " is not positive definite");
  }
  return llt;
}

void require_pd(const Matrix& m, const char* what) {
  linalg::require_symmetric(m, linalg::kDefaultSymmetryTol, what);
  if (!linalg::chol_psd(m)) throw InvalidArgument(std::string(what) + " is not positive definite");
}

// One covariance step with the measurement-update gain supplied by `gain_of`,
// which maps a prior P to P C^T (C P C^T + R)^{-1} or its R = 0 analogue.
template <typename GainFn>
RiccatiSolution iterate_dare(const LinearSystem& sys, const SolverOptions& opts, GainFn gain_of) {
  opts.validate();
  const Matrix& a = sys.A();
  const Matrix& c = sys.C();
  const Matrix& w = sys.process_noise();

  RiccatiSolution sol;
  Matrix p = w;
  for (long k = 1; k <= opts.max_iters; ++k) {
    const Matrix gain = gain_of(p);
    const Matrix post = p - gain * (c * p);
    Matrix next = linalg::symmetrize(a * post * a.transpose() + w);

    const double norm = next.norm();
    if (!std::isfinite(norm) || norm > opts.divergence_cap) {
      throw Diverged("Riccati iteration diverged after " + std::to_string(k) +
                     " iterations (||P||_F exceeded " + std::to_string(opts.divergence_cap) +
                     "); the system is likely not detectable");
    }
    const double step = (next - p).norm();
    const double scale = std::max(1.0, p.norm());
    p = std::move(next);
    if (step <= opts.rel_tol * scale) {
      sol.P = std::move(p);
      sol.iterations = k;
      return sol;
    }
  }
  throw NotConverged("Riccati iteration did not converge within " +
                     std::to_string(opts.max_iters) +
                     " iterations; the system may be only marginally detectable");
}

}  // namespace

void SolverOptions::validate() const {
  if (!(rel_tol > 0)) throw InvalidArgument("solver rel_tol must be positive");
  if (max_iters < 1) throw InvalidArgument("solver max_iters must be at least 1");
  if (!(divergence_cap > 0)) throw InvalidArgument("solver divergence_cap must be positive");
}

void UareParams::validate() const {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw InvalidArgument("UARE: A must be square");
  if (G.rows() != n) throw InvalidArgument("UARE: G must have as many rows as A");
  if (Q.rows() != n || Q.cols() != n) throw InvalidArgument("UARE: Q must match A");
  if (R.rows() != G.cols() || R.cols() != G.cols()) {
    throw InvalidArgument("UARE: R must be square with as many rows as G has columns");
  }
  if (!(delta >= 0)) throw InvalidArgument("UARE: delta must be non-negative");
  require_pd(R, "UARE: R");
}

UareParams to_uare_params(const LinearSystem& sys, const Matrix& r) {
  UareParams p;
  p.A = sys.A().transpose() - Matrix::Identity(sys.nx(), sys.nx());
  p.G = sys.C().transpose();
  p.Q = sys.process_noise();
  p.R = r;
  p.delta = 1.0;
  return p;
}

RiccatiSolution solve_dare(const LinearSystem& sys, const Matrix& r, const SolverOptions& opts) {
  if (r.rows() != sys.ny() || r.cols() != sys.ny()) {
    throw InvalidArgument("solve_dare: R must be " + std::to_string(sys.ny()) + "x" +
                          std::to_string(sys.ny()));
  }
  require_pd(r, "solve_dare: R");
  const Matrix& c = sys.C();
  auto sol = iterate_dare(sys, opts, [&](const Matrix& p) -> Matrix {
    const Matrix s = c * p * c.transpose() + r;
    Eigen::LLT<Matrix> llt(linalg::symmetrize(s));
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("solve_dare: innovation covariance lost definiteness");
    }
    return llt.solve(c * p).transpose();
  });
  sol.residual = dare_residual(sys, r, sol.P);
  return sol;
}

RiccatiSolution solve_dare_zero_r(const LinearSystem& sys, const SolverOptions& opts) {
  const Matrix& c = sys.C();
  const Matrix& a = sys.A();
  const Matrix& w = sys.process_noise();
  auto zero_r_gain = [&](const Matrix& p) -> Matrix {
    return p * c.transpose() * linalg::pinv_sym(linalg::symmetrize(c * p * c.transpose()),
                                                kZeroRRankTol);
  };
  auto sol = iterate_dare(sys, opts, zero_r_gain);

  const Matrix gain = zero_r_gain(sol.P);
  sol.residual = (a * (sol.P - gain * c * sol.P) * a.transpose() + w - sol.P).norm();

  // P(eps) - P(0) is first order in eps with a slope that grows like
  // 1 / sigma_min(C)^2, so the two regularized solves are extrapolated
  // linearly to eps = 0 before comparing.
  constexpr double kEpsCoarse = 1e-6;
  constexpr double kEpsFine = 1e-8;
  const Matrix i_y = Matrix::Identity(sys.ny(), sys.ny());
  const Matrix coarse = solve_dare(sys, kEpsCoarse * i_y, opts).P;
  const Matrix fine = solve_dare(sys, kEpsFine * i_y, opts).P;
  const Matrix limit = fine - (coarse - fine) * (kEpsFine / (kEpsCoarse - kEpsFine));
  const double gap = (limit - sol.P).norm();
  if (gap > kZeroRCrossCheckTol * std::max(1.0, sol.P.norm())) {
    throw NumericalFailure("solve_dare_zero_r: pseudo-inverse solution disagrees with the "
                           "R = eps I limit (||dP||_F = " + std::to_string(gap) + ")");
  }
  return sol;
}

Matrix solve_stein(const Matrix& a, const Matrix& w, const SolverOptions& opts) {
  opts.validate();
  linalg::require_square(a, "solve_stein: A");
  if (w.rows() != a.rows() || w.cols() != a.cols()) {
    throw InvalidArgument("solve_stein: W must match A");
  }
  linalg::require_symmetric(w, linalg::kDefaultSymmetryTol, "solve_stein: W");
  const double rho = linalg::spectral_radius(a);
  if (!(rho < 1.0)) {
    throw InvalidArgument("solve_stein: A is not stable (spectral radius " + std::to_string(rho) +
                          ")");
  }

  Matrix p = linalg::symmetrize(w);
  Matrix ak = a;
  bool converged = false;
  for (int k = 0; k < kMaxSquarings; ++k) {
    const Matrix inc = ak * p * ak.transpose();
    p = linalg::symmetrize(p + inc);
    ak = ak * ak;
    if (inc.norm() <= opts.rel_tol * std::max(1.0, p.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NotConverged("solve_stein: Smith iteration did not converge");

  const double res = stein_residual(a, w, p);
  if (res > kSteinResidualTol * std::max(1.0, p.norm())) {
    throw NumericalFailure("solve_stein: residual " + std::to_string(res) + " above tolerance");
  }
  return p;
}

double dare_residual(const LinearSystem& sys, const Matrix& r, const Matrix& p) {
  const Matrix& a = sys.A();
  const Matrix& c = sys.C();
  const auto llt = factor_pd(c * p * c.transpose() + r, "dare_residual: R + C P C^T");
  const Matrix apct = a * p * c.transpose();
  const Matrix res = a * p * a.transpose() - p - apct * llt.solve(apct.transpose()) +
                     sys.process_noise();
  return res.norm();
}

double stein_residual(const Matrix& a, const Matrix& w, const Matrix& p) {
  return (p - a * p * a.transpose() - w).norm();
}

double uare_r_residual(const UareParams& params, const Matrix& p) {
  params.validate();
  const Eigen::Index n = params.A.rows();
  if (p.rows() != n || p.cols() != n) throw InvalidArgument("uare_r_residual: P must match A");
  const double d = params.delta;
  const Matrix& a = params.A;
  const Matrix& g = params.G;
  const Matrix e = d * a + Matrix::Identity(n, n);

  const Matrix inner = params.R + d * g.transpose() * p * g;
  Eigen::LLT<Matrix> llt(linalg::symmetrize(inner));
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("uare_r_residual: R + delta G^T P G is singular");
  }
  const Matrix gpe = g.transpose() * p * e;
  const Matrix lhs = p * a + a.transpose() * p + d * a.transpose() * p * a -
                     gpe.transpose() * llt.solve(gpe) + params.Q;
  return lhs.norm();
}

double uare_r_residual_inversion_form(const UareParams& params, const Matrix& p) {
  params.validate();
  const Eigen::Index n = params.A.rows();
  if (p.rows() != n || p.cols() != n) {
    throw InvalidArgument("uare_r_residual_inversion_form: P must match A");
  }
  const double d = params.delta;
  const Matrix e = d * params.A + Matrix::Identity(n, n);
  const auto p_llt = factor_pd(p, "uare_r_residual_inversion_form: P");
  const auto r_llt = factor_pd(params.R, "uare_r_residual_inversion_form: R");
  const Matrix info = p_llt.solve(Matrix::Identity(n, n)) +
                      d * params.G * r_llt.solve(params.G.transpose());
  const auto info_llt = factor_pd(info, "uare_r_residual_inversion_form: P^-1 + d G R^-1 G^T");
  const Matrix lhs = e.transpose() * info_llt.solve(e) + d * params.Q - p;
  return lhs.norm();
}

Matrix kalman_gain(const LinearSystem& sys, const Matrix& p, const Matrix& r) {
  const Matrix& c = sys.C();
  Eigen::LLT<Matrix> llt(linalg::symmetrize(c * p * c.transpose() + r));
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("kalman_gain: innovation covariance C P C^T + R is singular");
  }
  return llt.solve(c * p).transpose();
}

}  // namespace kfbound
