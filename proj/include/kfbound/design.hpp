#ifndef KFBOUND_DESIGN_HPP
#define KFBOUND_DESIGN_HPP

#include <optional>
#include <string>
#include <vector>

#include "kfbound/bounds.hpp"
#include "kfbound/linalg.hpp"
#include "kfbound/model.hpp"
#include "kfbound/riccati.hpp"

namespace kfbound {

/// Diagonal noise design: choose R = diag(lambda) minimizing
/// sum_i weights_i lambda_i while certifying P ⪰ P_l_f.
struct DesignProblem {
  LinearSystem sys;
  Matrix P_l_f;
  double lambda_u_f = 0;
  Vector weights;

  /// 1 / lambda_u_f, the per-channel floor on lambda.
  double floor() const { return 1.0 / lambda_u_f; }
  void validate() const;
};

struct DesignSolution {
  Vector lambda;
  double cost = 0;
  /// Precision matrix diagonal, 1 / lambda_i.
  Vector S_diag;
  int barrier_iterations = 0;
  /// nu / t at termination, a bound on the cost suboptimality.
  double kkt_gap = 0;
  /// Smallest eigenvalue of [[T1, C^T], [C, diag(lambda)]].
  double lmi_min_eig = 0;
};

/// Result of the feasibility probe: either a strictly feasible start
/// (every channel at the same value) or the reason there is none.
struct FeasibilityResult {
  std::optional<Vector> start;
  std::string reason;
  double t1_min_eig = 0;

  bool feasible() const { return start.has_value(); }
};

struct BarrierOptions {
  double t0 = 1.0;
  double t_growth = 10.0;
  double rel_gap = 1e-8;
  /// Newton decrement^2 / 2 below which a centering step is done.
  double newton_tol = 1e-10;
  int max_newton_per_center = 500;
  int max_outer = 100;
};

struct VerificationReport {
  Matrix P_star;
  double min_eig_gap = 0;
  bool satisfied = false;
};

struct ShrinkOptions {
  double resolution = 1e-3;
  double tol = 1e-8;
  SolverOptions solver;
};

struct ShrinkResult {
  double gamma = 1.0;
  Vector lambda;
  /// gamma hit the bisection floor; the bound does not constrain the design.
  bool at_floor = false;
  std::vector<std::string> warnings;
};

FeasibilityResult check_feasibility(const Theorem2Certificate& cert, const Matrix& c, double ell);

/// Log-barrier path following on
///   t w^T lambda - log det M(lambda) - sum_i log(lambda_i - ell)
/// with M(lambda) = [[T1, C^T], [C, diag(lambda)]].
DesignSolution solve_min_weighted_l1(const DesignProblem& prob, const Theorem2Certificate& cert,
                                     const BarrierOptions& opts = {});

/// Solve the DARE with R = diag(lambda) and compare against P_l_f.
VerificationReport verify_bound(const LinearSystem& sys, const Vector& lambda, const Matrix& P_l_f,
                                double tol = 1e-8, const SolverOptions& opts = {});

/// Smallest gamma in (0, 1] (to the given relative resolution) such that
/// gamma * lambda_star still passes verify_bound.
ShrinkResult refine_shrink(const LinearSystem& sys, const Vector& lambda_star,
                           const Matrix& P_l_f, const ShrinkOptions& opts = {});

/// Synthetic noise R_s = R_total - R_a, per channel. Throws InvalidArgument
/// naming each channel whose physical noise already exceeds the design.
Vector split_synthetic(const Vector& r_total_diag, const Vector& r_a_diag);

/// [[T1, C^T], [C, diag(lambda)]]
Matrix lmi_matrix(const Matrix& t1, const Matrix& c, const Vector& lambda);

}  // namespace kfbound

#endif  // KFBOUND_DESIGN_HPP
