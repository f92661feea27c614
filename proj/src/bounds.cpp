#include "kfbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kfbound {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kInvertibleTol = 1e-10;
constexpr double kMarginPd = 1e-10;

}  // namespace

Matrix checked_spd_inverse(const Matrix& m, const char* what) {
  const auto eig = linalg::sym_eig(m);
  const double lo = eig.min();
  const double hi = eig.max();
  if (!(lo > 0)) {
    throw NumericalFailure(std::string(what) + " is not positive definite (min eigenvalue " +
                           std::to_string(lo) + ")");
  }
  if (hi / lo > kMaxCondition) {
    throw NumericalFailure(std::string(what) + " is too ill-conditioned to invert (condition " +
                           std::to_string(hi / lo) + ")");
  }
  const Vector inv = eig.eigenvalues.cwiseInverse();
  return linalg::symmetrize(eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose());
}

double quad_root_f(double a, double b, double c) {
  if (!(b > 0)) throw InvalidArgument("quad_root_f: b must be positive");
  const double disc = a * a + b * c;
  if (!(disc >= 0)) throw InvalidArgument("quad_root_f: a^2 + bc must be non-negative");
  const double root = std::sqrt(disc);
  // Avoid cancellation in -a + sqrt(a^2 + bc) when a > 0.
  if (a > 0) return c / (a + root);
  return (root - a) / b;
}

Theorem1Bound theorem1_bound(const UareParams& params) {
  params.validate();
  const Eigen::Index n = params.A.rows();
  const double d = params.delta;
  const Matrix& a = params.A;
  const Matrix& g = params.G;
  const Matrix i = Matrix::Identity(n, n);

  const double r_inv_max = 1.0 / linalg::min_eigenvalue(params.R);
  const double g_sigma = linalg::max_singular_value(g);
  if (!(g_sigma > 0)) throw InvalidArgument("theorem1_bound: G must be non-zero");
  const double s = r_inv_max * g_sigma * g_sigma;
  const double q_min = std::max(0.0, linalg::min_eigenvalue(params.Q));
  const double sym_min =
      linalg::min_eigenvalue(linalg::symmetrize(a + a.transpose() + d * a.transpose() * a));

  Theorem1Bound out;
  out.phi = quad_root_f(-(sym_min + d * q_min * s), 2.0 * s, 2.0 * q_min);
  if (!(out.phi > 0)) {
    throw InvalidArgument("theorem1_bound: phi is not positive (lambda_min(Q) = 0 with a "
                          "non-negative linear coefficient)");
  }

  const Matrix e = d * a + i;
  const Matrix gain_info = d * g * checked_spd_inverse(params.R, "R") * g.transpose();
  out.P_l0 = linalg::symmetrize(
      e.transpose() * checked_spd_inverse(i / out.phi + gain_info, "phi^-1 I + d G R^-1 G^T") * e +
      d * params.Q);
  out.P_l1 = linalg::symmetrize(
      e.transpose() *
          checked_spd_inverse(checked_spd_inverse(out.P_l0, "P_l0") + gain_info,
                              "P_l0^-1 + d G R^-1 G^T") *
          e +
      d * params.Q);
  return out;
}

Theorem2Certificate theorem2_certificate(const LinearSystem& sys, const Matrix& P_l_f,
                                         double lambda_u_f) {
  if (!(lambda_u_f > 0) || !std::isfinite(lambda_u_f)) {
    throw InvalidArgument("theorem2_certificate: lambda_u_f must be positive");
  }
  const Eigen::Index n = sys.nx();
  if (P_l_f.rows() != n || P_l_f.cols() != n) {
    throw InvalidArgument("theorem2_certificate: P_l_f must be " + std::to_string(n) + "x" +
                          std::to_string(n));
  }
  linalg::require_symmetric(P_l_f, linalg::kDefaultSymmetryTol, "P_l_f");

  const Matrix& a = sys.A();
  const Matrix& c = sys.C();
  const Matrix& q = sys.process_noise();
  const Matrix i = Matrix::Identity(n, n);

  const Vector a_sigma = linalg::singular_values(a);
  if (!(a_sigma(0) > 0) || !(a_sigma(n - 1) > kInvertibleTol * a_sigma(0))) {
    throw Infeasible("A is singular; the certificate needs an invertible A");
  }
  const Matrix headroom = linalg::symmetrize(P_l_f - q);
  const double headroom_min = linalg::min_eigenvalue(headroom);
  if (!(headroom_min > kMarginPd)) {
    throw Infeasible("P_l_f - B Q B^T is not positive definite (min eigenvalue " +
                     std::to_string(headroom_min) + "); the prescribed bound must exceed the "
                     "process noise");
  }

  const double c_sigma = linalg::max_singular_value(c);
  if (!(c_sigma > 0)) throw InvalidArgument("theorem2_certificate: C must be non-zero");
  const double s = lambda_u_f * c_sigma * c_sigma;
  const double q_min = std::max(0.0, linalg::min_eigenvalue(q));
  const double sym_min = linalg::min_eigenvalue(linalg::symmetrize(a * a.transpose() - i));

  Theorem2Certificate cert;
  cert.lambda_u_f = lambda_u_f;
  cert.P_l_f = linalg::symmetrize(P_l_f);
  cert.phi_prime = quad_root_f(-(sym_min + q_min * s), 2.0 * s, 2.0 * q_min);
  if (!(cert.phi_prime > 0)) {
    throw InvalidArgument("theorem2_certificate: phi' is not positive");
  }
  cert.P_l0_prime = linalg::symmetrize(
      a *
          checked_spd_inverse(i / cert.phi_prime + lambda_u_f * c.transpose() * c,
                              "phi'^-1 I + lambda_u_f C^T C") *
          a.transpose() +
      q);
  cert.T1 = linalg::symmetrize(a.transpose() * checked_spd_inverse(headroom, "P_l_f - Q") * a -
                               checked_spd_inverse(cert.P_l0_prime, "P'_l0"));
  return cert;
}

CovarianceEnvelope envelope(const LinearSystem& sys, const SolverOptions& opts) {
  const double rho = linalg::spectral_radius(sys.A());
  if (!(rho < 1.0)) {
    throw InvalidArgument("envelope: A is not stable (spectral radius " + std::to_string(rho) +
                          "); the upper envelope does not exist");
  }
  CovarianceEnvelope env;
  env.P_lb = solve_dare_zero_r(sys, opts).P;
  env.P_ub = solve_stein(sys.A(), sys.process_noise(), opts);
  return env;
}

Matrix prescribe_bound(const CovarianceEnvelope& env, double alpha) {
  if (!(alpha > 0 && alpha < 1)) {
    throw InvalidArgument("prescribe_bound: alpha must lie in (0, 1)");
  }
  if (env.P_lb.rows() != env.P_ub.rows() || env.P_lb.cols() != env.P_ub.cols()) {
    throw InvalidArgument("prescribe_bound: envelope matrices differ in shape");
  }
  return linalg::symmetrize(alpha * env.P_ub + (1.0 - alpha) * env.P_lb);
}

}  // namespace kfbound
