#include "kfbound/design.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace kfbound {

namespace {

constexpr double kLambdaBig = 1e12;
constexpr double kT1Margin = 1e-10;
constexpr double kStartMargin = 1e-8;
constexpr int kMaxDoublings = 200;
constexpr double kArmijo = 0.25;
constexpr double kMinStep = 1e-16;
constexpr double kFloorSlack = 1e-9;
constexpr double kLmiSlack = 1e-8;

// Everything the Newton step needs at one iterate.
struct BarrierPoint {
  linalg::CholeskyResult<double> chol;
  bool inside = false;
};

BarrierPoint evaluate(const Matrix& t1, const Matrix& c, const Vector& lambda, double ell) {
  BarrierPoint pt;
  if ((lambda.array() <= ell).any()) return pt;
  pt.chol = linalg::chol_psd(lmi_matrix(t1, c, lambda));
  pt.inside = pt.chol.is_pd();
  return pt;
}

}  // namespace

void DesignProblem::validate() const {
  const Eigen::Index n = sys.nx();
  if (P_l_f.rows() != n || P_l_f.cols() != n) {
    throw InvalidArgument("design: P_l_f must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  linalg::require_symmetric(P_l_f, linalg::kDefaultSymmetryTol, "design: P_l_f");
  if (!linalg::chol_psd(P_l_f)) throw InvalidArgument("design: P_l_f must be positive definite");
  if (!(lambda_u_f > 0) || !std::isfinite(lambda_u_f)) {
    throw InvalidArgument("design: lambda_u_f must be positive");
  }
  if (weights.size() != sys.ny()) {
    throw InvalidArgument("design: weights must have one entry per measurement channel");
  }
  if (!(weights.array() > 0).all() || !weights.allFinite()) {
    throw InvalidArgument("design: weights must be strictly positive");
  }
}

Matrix lmi_matrix(const Matrix& t1, const Matrix& c, const Vector& lambda) {
  const Eigen::Index n = t1.rows();
  const Eigen::Index m = lambda.size();
  Matrix out(n + m, n + m);
  out.topLeftCorner(n, n) = t1;
  out.topRightCorner(n, m) = c.transpose();
  out.bottomLeftCorner(m, n) = c;
  out.bottomRightCorner(m, m) = lambda.asDiagonal();
  return out;
}

FeasibilityResult check_feasibility(const Theorem2Certificate& cert, const Matrix& c, double ell) {
  if (!(ell > 0)) throw InvalidArgument("check_feasibility: floor must be positive");
  const Matrix& t1 = cert.T1;
  if (c.cols() != t1.rows()) throw InvalidArgument("check_feasibility: C does not match T1");

  FeasibilityResult out;
  out.t1_min_eig = linalg::min_eigenvalue(t1);
  const Matrix ctc = c.transpose() * c;

  if (!linalg::is_positive_definite(Matrix(t1 - ctc / kLambdaBig), kT1Margin)) {
    std::ostringstream os;
    os << "T1 is not positive definite (min eigenvalue " << out.t1_min_eig
       << "); no diagonal R satisfies [[T1, C^T], [C, R]] >= 0 for this prescribed bound";
    out.reason = os.str();
    return out;
  }

  double mu = ell;
  for (int k = 0; k < kMaxDoublings; ++k) {
    if (linalg::is_positive_definite(Matrix(t1 - ctc / mu), kStartMargin)) {
      // One further doubling keeps the start off both barriers.
      out.start = Vector::Constant(c.rows(), 2.0 * mu);
      return out;
    }
    mu *= 2.0;
  }
  out.reason = "no strictly feasible start found: the Schur complement T1 - C^T C / mu stays "
               "within the margin for every mu tried";
  return out;
}

DesignSolution solve_min_weighted_l1(const DesignProblem& prob, const Theorem2Certificate& cert,
                                     const BarrierOptions& opts) {
  prob.validate();
  const Matrix& t1 = cert.T1;
  const Matrix& c = prob.sys.C();
  const Eigen::Index n = t1.rows();
  const Eigen::Index m = c.rows();
  const double ell = prob.floor();
  const Vector& w = prob.weights;

  const auto feas = check_feasibility(cert, c, ell);
  if (!feas.feasible()) throw Infeasible(feas.reason);

  Vector lambda = *feas.start;
  BarrierPoint here = evaluate(t1, c, lambda, ell);
  if (!here.inside) throw NumericalFailure("barrier: feasibility start is not strictly feasible");

  const double nu = static_cast<double>((n + m) + m);
  double t = opts.t0;
  int newton_total = 0;

  for (int outer = 0;; ++outer) {
    if (outer >= opts.max_outer) {
      throw NotConverged("barrier: outer iteration cap exceeded");
    }
    // Centering by damped Newton.
    for (int it = 0;; ++it) {
      if (it >= opts.max_newton_per_center) {
        throw NotConverged("barrier: Newton iteration cap exceeded while centering");
      }
      const Matrix minv = linalg::inverse_from_cholesky(here.chol);
      const Vector slack = lambda.array() - ell;
      const Matrix md = minv.bottomRightCorner(m, m);

      const Vector grad = t * w.array() - md.diagonal().array() - slack.array().inverse();
      Matrix hess = md.array().square().matrix();
      hess.diagonal().array() += slack.array().square().inverse();

      Eigen::LLT<Matrix> hllt(hess);
      if (hllt.info() != Eigen::Success) {
        throw NumericalFailure("barrier: Hessian lost definiteness");
      }
      const Vector step = -hllt.solve(grad);
      const double slope = grad.dot(step);
      const double dec2 = -slope;
      if (dec2 / 2.0 <= opts.newton_tol) break;

      const double logdet_here = here.chol.log_det();
      double s = 1.0;
      bool accepted = false;
      while (s >= kMinStep) {
        const Vector trial = lambda + s * step;
        BarrierPoint next = evaluate(t1, c, trial, ell);
        if (next.inside) {
          // Change in the barrier objective, formed term by term to avoid
          // cancellation between large t * cost values.
          double change = t * w.dot(s * step) - (next.chol.log_det() - logdet_here);
          for (Eigen::Index i = 0; i < m; ++i) change -= std::log1p(s * step(i) / slack(i));
          if (change <= kArmijo * s * slope) {
            lambda = trial;
            here = std::move(next);
            accepted = true;
            break;
          }
        }
        s *= 0.5;
      }
      ++newton_total;
      if (!accepted) {
        // Rounding floor: the point is centered as well as double precision allows.
        if (dec2 < 1e-6) break;
        throw NumericalFailure("barrier: line search could not keep the LMI positive definite");
      }
    }

    const double cost = w.dot(lambda);
    const double gap = nu / t;
    if (gap <= opts.rel_gap * std::max(1.0, cost)) {
      DesignSolution sol;
      sol.lambda = lambda;
      sol.cost = cost;
      sol.S_diag = lambda.cwiseInverse();
      sol.barrier_iterations = newton_total;
      sol.kkt_gap = gap;
      sol.lmi_min_eig = linalg::min_eigenvalue(lmi_matrix(t1, c, lambda));
      if (lambda.minCoeff() < ell - kFloorSlack || sol.lmi_min_eig < -kLmiSlack) {
        throw NumericalFailure("barrier: returned design violates its constraints");
      }
      return sol;
    }
    t *= opts.t_growth;
  }
}

VerificationReport verify_bound(const LinearSystem& sys, const Vector& lambda, const Matrix& P_l_f,
                                double tol, const SolverOptions& opts) {
  if (lambda.size() != sys.ny()) {
    throw InvalidArgument("verify_bound: lambda must have one entry per measurement channel");
  }
  if (!(lambda.array() > 0).all()) throw InvalidArgument("verify_bound: lambda must be positive");
  if (P_l_f.rows() != sys.nx() || P_l_f.cols() != sys.nx()) {
    throw InvalidArgument("verify_bound: P_l_f does not match the state dimension");
  }
  VerificationReport rep;
  rep.P_star = solve_dare(sys, lambda.asDiagonal().toDenseMatrix(), opts).P;
  rep.min_eig_gap = linalg::min_eigenvalue(linalg::symmetrize(rep.P_star - P_l_f));
  rep.satisfied = rep.min_eig_gap >= -tol;
  return rep;
}

ShrinkResult refine_shrink(const LinearSystem& sys, const Vector& lambda_star, const Matrix& P_l_f,
                           const ShrinkOptions& opts) {
  if (!(opts.resolution > 0 && opts.resolution < 1)) {
    throw InvalidArgument("refine_shrink: resolution must lie in (0, 1)");
  }
  auto passes = [&](double gamma) {
    return verify_bound(sys, gamma * lambda_star, P_l_f, opts.tol, opts.solver).satisfied;
  };
  if (!passes(1.0)) {
    throw InvalidArgument("refine_shrink: the unscaled design does not satisfy the bound");
  }

  ShrinkResult out;
  const double floor = opts.resolution;
  if (passes(floor)) {
    out.gamma = floor;
    out.at_floor = true;
    out.warnings.emplace_back("bound is satisfied even at the bisection floor; the prescribed "
                              "P_l_f does not constrain the design");
  } else {
    double lo = floor;
    double hi = 1.0;
    while (hi - lo > opts.resolution * hi) {
      const double mid = 0.5 * (lo + hi);
      if (passes(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out.gamma = hi;
  }
  out.lambda = out.gamma * lambda_star;
  return out;
}

Vector split_synthetic(const Vector& r_total_diag, const Vector& r_a_diag) {
  if (r_total_diag.size() != r_a_diag.size()) {
    throw InvalidArgument("split_synthetic: R_total and R_a differ in length");
  }
  if ((r_a_diag.array() < 0).any()) {
    throw InvalidArgument("split_synthetic: R_a must be non-negative");
  }
  const Vector synthetic = r_total_diag - r_a_diag;
  std::ostringstream bad;
  for (Eigen::Index i = 0; i < synthetic.size(); ++i) {
    if (synthetic(i) < 0) {
      bad << " channel " << (i + 1) << " (designed " << r_total_diag(i) << " < actual "
          << r_a_diag(i) << ")";
    }
  }
  if (!bad.str().empty()) {
    throw InvalidArgument("split_synthetic: physical noise already exceeds the design on" +
                          bad.str());
  }
  return synthetic;
}

}  // namespace kfbound
