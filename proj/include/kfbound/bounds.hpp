#ifndef KFBOUND_BOUNDS_HPP
#define KFBOUND_BOUNDS_HPP

#include "kfbound/linalg.hpp"
#include "kfbound/model.hpp"
#include "kfbound/riccati.hpp"

namespace kfbound {

/// Eigenvalue lower bounds on the positive solution P of the unified
/// Riccati equation: λ_min(P) >= phi, P ⪰ P_l0 and P ⪰ P_l1.
struct Theorem1Bound {
  double phi = 0;
  Matrix P_l0;
  Matrix P_l1;
};

/// Quantities defining the convex set of noise covariances R that keep the
/// steady-state prior covariance above P_l_f:
///
///   R ⪰ (1 / lambda_u_f) I,   [[T1, C^T], [C, R]] ⪰ 0.
struct Theorem2Certificate {
  double phi_prime = 0;
  Matrix P_l0_prime;
  Matrix T1;
  double lambda_u_f = 0;
  Matrix P_l_f;
};

/// Achievable steady-state covariances lie between P_lb (R = 0) and
/// P_ub (R = infinity).
struct CovarianceEnvelope {
  Matrix P_lb;
  Matrix P_ub;
};

/// Nonnegative root of (b/2) x^2 + a x - c/2 = 0, i.e. (-a + sqrt(a^2 + bc)) / b.
double quad_root_f(double a, double b, double c);

/// phi, P_l0 and P_l1 for the given equation parameters.
Theorem1Bound theorem1_bound(const UareParams& params);

/// Builds the feasible-set certificate for a prescribed bound P_l_f and a
/// cap lambda_u_f on the precision spectrum. Throws Infeasible when A is
/// singular or P_l_f - B Q B^T is not positive definite.
Theorem2Certificate theorem2_certificate(const LinearSystem& sys, const Matrix& P_l_f,
                                         double lambda_u_f);

CovarianceEnvelope envelope(const LinearSystem& sys, const SolverOptions& opts = {});

/// alpha P_ub + (1 - alpha) P_lb for alpha in (0, 1).
Matrix prescribe_bound(const CovarianceEnvelope& env, double alpha);

/// Inverse of a symmetric positive definite matrix, rejecting condition
/// numbers above 1e12.
Matrix checked_spd_inverse(const Matrix& m, const char* what);

}  // namespace kfbound

#endif  // KFBOUND_BOUNDS_HPP
