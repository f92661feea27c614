#ifndef KFBOUND_RICCATI_HPP
#define KFBOUND_RICCATI_HPP

#include "kfbound/linalg.hpp"
#include "kfbound/model.hpp"

namespace kfbound {

struct SolverOptions {
  double rel_tol = 1e-12;
  long max_iters = 200000;
  /// Bound on ||P||_F beyond which the iteration is declared divergent.
  double divergence_cap = 1e12;

  void validate() const;
};

/// Steady-state prior error covariance and how it was reached.
struct RiccatiSolution {
  Matrix P;
  long iterations = 0;
  /// Frobenius norm of the DARE residual at P.
  double residual = 0;
};

/// Parameters of the unified (sampling-period) Riccati equation with an
/// explicit noise weight R:
///
///   P A + A^T P + Δ A^T P A
///     - (Δ A^T + I) P G (R + Δ G^T P G)^{-1} G^T P (Δ A + I) + Q = 0
///
/// Δ = 0 is the continuous-time equation; Δ = 1 with A = A_d^T - I,
/// G = C^T, Q = B Q_d B^T is the discrete filter equation.
struct UareParams {
  Matrix A;
  Matrix G;
  Matrix Q;
  Matrix R;
  double delta = 1.0;

  void validate() const;
};

/// Discrete filter equation mapped into UareParams (Δ = 1).
UareParams to_uare_params(const LinearSystem& sys, const Matrix& r);

/// Fixed-point covariance iteration
///   P <- A (P - P C^T (C P C^T + R)^{-1} C P) A^T + B Q B^T
/// started at B Q B^T.
RiccatiSolution solve_dare(const LinearSystem& sys, const Matrix& r,
                           const SolverOptions& opts = {});

/// The R = 0 limit of solve_dare. The inverse is replaced by a
/// pseudo-inverse and the answer is cross-checked against R = εI for
/// ε in {1e-6, 1e-8}.
RiccatiSolution solve_dare_zero_r(const LinearSystem& sys, const SolverOptions& opts = {});

/// P = A P A^T + W for stable A, by Smith squaring.
Matrix solve_stein(const Matrix& a, const Matrix& w, const SolverOptions& opts = {});

/// ||A P A^T - P - A P C^T (R + C P C^T)^{-1} C P A^T + B Q B^T||_F
double dare_residual(const LinearSystem& sys, const Matrix& r, const Matrix& p);

/// ||P - A P A^T - W||_F
double stein_residual(const Matrix& a, const Matrix& w, const Matrix& p);

/// Frobenius norm of the unified equation's left-hand side at P.
double uare_r_residual(const UareParams& params, const Matrix& p);

/// Frobenius norm of the matrix-inversion-lemma form
///   (ΔA + I)^T (P^{-1} + Δ G R^{-1} G^T)^{-1} (ΔA + I) + Δ Q - P,
/// which equals Δ times the left-hand side evaluated by uare_r_residual.
double uare_r_residual_inversion_form(const UareParams& params, const Matrix& p);

/// K = P C^T (C P C^T + R)^{-1}
Matrix kalman_gain(const LinearSystem& sys, const Matrix& p, const Matrix& r);

}  // namespace kfbound

#endif  // KFBOUND_RICCATI_HPP
