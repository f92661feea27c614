#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "kfbound/design.hpp"
#include "test_util.hpp"

namespace kfbound {
namespace {

using testing::scalar;

LinearSystem scalar_chain_system() {
  return LinearSystem(scalar(0.5), scalar(1), scalar(1), scalar(1));
}

Theorem2Certificate cert_with_t1(const Matrix& t1, double lambda_u_f = 1.0) {
  Theorem2Certificate cert;
  cert.T1 = t1;
  cert.lambda_u_f = lambda_u_f;
  cert.P_l_f = Matrix::Identity(t1.rows(), t1.rows());
  return cert;
}

// Scalar-chain DARE root for b = c = q = 1, a = 0.5.
double scalar_dare_oracle(double r) {
  const double lin = 0.75 * r - 1;
  return (-lin + std::sqrt(lin * lin + 4 * r)) / 2;
}

// Smallest lambda >= ell with T1 - c^T c / lambda >= 0 for one channel.
double single_channel_oracle(const Matrix& t1, const Matrix& c, double ell) {
  Eigen::LLT<Matrix> llt(t1);
  return std::max(ell, (c * llt.solve(c.transpose()))(0, 0));
}

TEST(CheckFeasibility, ScalarDoublingStart) {
  const auto res = check_feasibility(cert_with_t1(scalar(0.367219)), scalar(1), 1.0);
  ASSERT_TRUE(res.feasible());
  EXPECT_EQ((*res.start)(0), 8.0);
  EXPECT_NEAR(res.t1_min_eig, 0.367219, 1e-12);
}

TEST(CheckFeasibility, NegativeT1IsInfeasible) {
  const auto res = check_feasibility(cert_with_t1(scalar(-0.632781)), scalar(1), 1.0);
  EXPECT_FALSE(res.feasible());
  EXPECT_NE(res.reason.find("T1 is not positive definite"), std::string::npos);
  EXPECT_NEAR(res.t1_min_eig, -0.632781, 1e-12);
}

TEST(CheckFeasibility, DecoupledBlocks) {
  const auto res =
      check_feasibility(cert_with_t1(Matrix::Identity(2, 2)), Matrix::Zero(3, 2), 0.25);
  ASSERT_TRUE(res.feasible());
  EXPECT_EQ(*res.start, Vector::Constant(3, 0.5));
}

TEST(CheckFeasibility, Errors) {
  EXPECT_THROW(check_feasibility(cert_with_t1(scalar(1)), scalar(1), 0.0), InvalidArgument);
  EXPECT_THROW(check_feasibility(cert_with_t1(scalar(1)), Matrix::Ones(1, 2), 1.0),
               InvalidArgument);
}

TEST(LmiMatrix, Layout) {
  Matrix c(1, 2);
  c << 3, 4;
  const Matrix m = lmi_matrix(Matrix::Identity(2, 2), c, Vector::Constant(1, 7));
  Matrix expected(3, 3);
  expected << 1, 0, 3, 0, 1, 4, 3, 4, 7;
  EXPECT_EQ(m, expected);
}

TEST(SolveMinWeightedL1, ScalarChain) {
  const LinearSystem sys = scalar_chain_system();
  const auto cert = theorem2_certificate(sys, scalar(1.2), 1.0);
  const DesignProblem prob{sys, scalar(1.2), 1.0, Vector::Ones(1)};
  const auto sol = solve_min_weighted_l1(prob, cert);
  const double expected = 1.0 / cert.T1(0, 0);
  EXPECT_NEAR(sol.lambda(0), expected, 1e-6 * expected);
  EXPECT_NEAR(sol.lambda(0), 2.72317, 1e-4);
  EXPECT_NEAR(sol.cost, sol.lambda(0), 1e-15);
  EXPECT_NEAR(sol.S_diag(0), 1.0 / sol.lambda(0), 1e-15);
  EXPECT_GT(sol.barrier_iterations, 0);
  EXPECT_LE(sol.kkt_gap, 1e-8 * sol.cost);
  EXPECT_GE(sol.lmi_min_eig, -1e-8);
}

TEST(SolveMinWeightedL1, DiagonalDecoupling) {
  const Matrix i2 = Matrix::Identity(2, 2);
  const LinearSystem sys(0.5 * i2, i2, i2, i2);
  const DesignProblem prob{sys, 2 * i2, 2.0, Vector::Ones(2)};
  const auto sol = solve_min_weighted_l1(prob, cert_with_t1(i2, 2.0));
  EXPECT_NEAR(sol.lambda(0), 1.0, 1e-6);
  EXPECT_NEAR(sol.lambda(1), 1.0, 1e-6);
  EXPECT_NEAR(sol.cost, 2.0, 2e-6);
}

TEST(SolveMinWeightedL1, CoupledChannelsMatchConicSolver) {
  Matrix t1(2, 2);
  t1 << 2, 0.5, 0.5, 1;
  Matrix c(3, 2);
  c << 1, 0, 1, 1, 0, 1;
  Vector w(3);
  w << 1, 2, 0.5;
  const Matrix i2 = Matrix::Identity(2, 2);
  const DesignProblem prob{LinearSystem(0.5 * i2, i2, c, i2), 2 * i2, 10.0, w};
  const auto sol = solve_min_weighted_l1(prob, cert_with_t1(t1, 10.0));
  // Reference optimum from an independent interior-point conic solver.
  EXPECT_NEAR(sol.lambda(0), 0.773459, 1e-5);
  EXPECT_NEAR(sol.lambda(1), 1.773459, 1e-5);
  EXPECT_NEAR(sol.lambda(2), 2.453082, 1e-5);
  EXPECT_NEAR(sol.cost, 5.546918, 1e-5);
}

TEST(SolveMinWeightedL1, FloorBinds) {
  const LinearSystem sys = scalar_chain_system();
  const DesignProblem prob{sys, scalar(1.2), 1.0, Vector::Ones(1)};
  const auto sol = solve_min_weighted_l1(prob, cert_with_t1(scalar(1e6)));
  EXPECT_NEAR(sol.lambda(0), 1.0, 1e-6);

  // The same at the experiment's cap: lambda = 1 / 0.03.
  const DesignProblem capped{sys, scalar(1.2), 0.03, Vector::Ones(1)};
  const auto at_cap = solve_min_weighted_l1(capped, cert_with_t1(scalar(1e6), 0.03));
  EXPECT_NEAR(at_cap.lambda(0), 1.0 / 0.03, 1e-6 / 0.03);
  EXPECT_GE(at_cap.lambda(0), 33.333 - 1e-6);
}

TEST(SolveMinWeightedL1, InfeasibleCertificate) {
  const LinearSystem sys = scalar_chain_system();
  const DesignProblem prob{sys, scalar(2.0), 1.0, Vector::Ones(1)};
  EXPECT_THROW(solve_min_weighted_l1(prob, cert_with_t1(scalar(-0.632781))), Infeasible);
}

TEST(SolveMinWeightedL1, ProblemValidation) {
  const LinearSystem sys = scalar_chain_system();
  const auto cert = cert_with_t1(scalar(1));
  EXPECT_THROW(solve_min_weighted_l1({sys, scalar(1.2), 1.0, Vector::Zero(1)}, cert),
               InvalidArgument);
  EXPECT_THROW(solve_min_weighted_l1({sys, scalar(1.2), 1.0, Vector::Ones(2)}, cert),
               InvalidArgument);
  EXPECT_THROW(solve_min_weighted_l1({sys, scalar(-1), 1.0, Vector::Ones(1)}, cert),
               InvalidArgument);
  EXPECT_THROW(solve_min_weighted_l1({sys, scalar(1.2), 0.0, Vector::Ones(1)}, cert),
               InvalidArgument);
}

TEST(SolveMinWeightedL1, SingleChannelMatchesClosedForm) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto nx = testing::uniform_int(gen, 1, 5);
    const Matrix i = Matrix::Identity(nx, nx);
    const Matrix c = testing::random_matrix(gen, 1, nx);
    const Matrix t1 = testing::random_spd(gen, nx, 0.05) * testing::uniform(gen, 0.1, 10);
    const double lambda_u_f = std::pow(10.0, testing::uniform(gen, -2, 1));
    const LinearSystem sys(0.5 * i, i, c, i);
    const DesignProblem prob{sys, 2 * i, lambda_u_f, Vector::Constant(1, testing::uniform(gen, 0.1, 5))};
    const auto sol = solve_min_weighted_l1(prob, cert_with_t1(t1, lambda_u_f));
    const double expected = single_channel_oracle(t1, c, 1.0 / lambda_u_f);
    EXPECT_NEAR(sol.lambda(0), expected, 1e-6 * expected) << "trial " << trial;
  }
}

TEST(SolveMinWeightedL1, ScalingWeightsKeepsArgmin) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto nx = testing::uniform_int(gen, 1, 5);
    const auto ny = testing::uniform_int(gen, 1, 5);
    const Matrix i = Matrix::Identity(nx, nx);
    const Matrix c = testing::random_matrix(gen, ny, nx);
    const Matrix t1 = testing::random_spd(gen, nx, 0.2);
    const double lambda_u_f = testing::uniform(gen, 0.1, 2);
    const LinearSystem sys(0.5 * i, i, c, i);
    Vector w(ny);
    for (Eigen::Index k = 0; k < ny; ++k) w(k) = testing::uniform(gen, 0.2, 3);
    const double s = std::pow(10.0, testing::uniform(gen, -2, 2));
    const auto base = solve_min_weighted_l1({sys, 2 * i, lambda_u_f, w}, cert_with_t1(t1, lambda_u_f));
    const auto scaled =
        solve_min_weighted_l1({sys, 2 * i, lambda_u_f, Vector(s * w)}, cert_with_t1(t1, lambda_u_f));
    EXPECT_LE((base.lambda - scaled.lambda).norm(), 1e-6 * base.lambda.norm()) << "trial " << trial;
    EXPECT_NEAR(scaled.cost, s * base.cost, 1e-6 * s * base.cost);
    for (const auto& sol : {base, scaled}) {
      EXPECT_GE(sol.lambda.minCoeff(), 1.0 / lambda_u_f - 1e-9);
      EXPECT_GE(testing::oracle_min_eig(lmi_matrix(t1, c, sol.lambda)), -1e-8);
    }
  }
}

TEST(VerifyBound, ScalarChain) {
  const LinearSystem sys = scalar_chain_system();
  const auto rep = verify_bound(sys, Vector::Constant(1, 2.72317), scalar(1.2));
  EXPECT_NEAR(rep.P_star(0, 0), scalar_dare_oracle(2.72317), 1e-12);
  EXPECT_NEAR(rep.P_star(0, 0), 1.2094, 1e-4);
  EXPECT_NEAR(rep.min_eig_gap, 0.0094, 1e-4);
  EXPECT_TRUE(rep.satisfied);

  const auto tiny = verify_bound(sys, Vector::Constant(1, 1e-9), scalar(1.2));
  EXPECT_NEAR(tiny.P_star(0, 0), 1.0, 1e-6);
  EXPECT_FALSE(tiny.satisfied);

  EXPECT_TRUE(verify_bound(sys, Vector::Constant(1, 1e-3), scalar(0)).satisfied);
}

TEST(VerifyBound, Errors) {
  const LinearSystem sys = scalar_chain_system();
  EXPECT_THROW(verify_bound(sys, Vector::Ones(2), scalar(1)), InvalidArgument);
  EXPECT_THROW(verify_bound(sys, Vector::Zero(1), scalar(1)), InvalidArgument);
  EXPECT_THROW(verify_bound(sys, Vector::Ones(1), Matrix::Identity(2, 2)), InvalidArgument);
}

TEST(RefineShrink, ScalarChain) {
  const LinearSystem sys = scalar_chain_system();
  const double lambda_star = 2.72317;
  const auto res = refine_shrink(sys, Vector::Constant(1, lambda_star), scalar(1.2));
  // r = 2.4 solves 1.44 + 1.2 (0.75 r - 1) - r = 0, i.e. P* = 1.2 exactly.
  const double expected = 2.4 / lambda_star;
  EXPECT_GE(res.gamma, expected - 1e-8);
  EXPECT_LE(res.gamma, expected * (1 + 1e-3) + 1e-12);
  EXPECT_NEAR(res.gamma, 0.881, 2e-3);
  EXPECT_FALSE(res.at_floor);
  EXPECT_NEAR(res.lambda(0), res.gamma * lambda_star, 1e-15);
}

TEST(RefineShrink, TightDesignKeepsGammaOne) {
  const auto res = refine_shrink(scalar_chain_system(), Vector::Constant(1, 2.4), scalar(1.2));
  EXPECT_EQ(res.gamma, 1.0);
}

TEST(RefineShrink, DegenerateBoundHitsFloor) {
  ShrinkOptions opts;
  opts.resolution = 1e-3;
  const auto res = refine_shrink(scalar_chain_system(), Vector::Constant(1, 2.0), scalar(0), opts);
  EXPECT_TRUE(res.at_floor);
  EXPECT_EQ(res.gamma, 1e-3);
  EXPECT_FALSE(res.warnings.empty());
}

TEST(RefineShrink, Errors) {
  const LinearSystem sys = scalar_chain_system();
  EXPECT_THROW(refine_shrink(sys, Vector::Constant(1, 1.0), scalar(1.2)), InvalidArgument);
  ShrinkOptions bad;
  bad.resolution = 0;
  EXPECT_THROW(refine_shrink(sys, Vector::Constant(1, 3.0), scalar(1.2), bad), InvalidArgument);
}

TEST(SplitSynthetic, Examples) {
  const Vector s = split_synthetic(Vector::Constant(1, 2.72317), Vector::Constant(1, 1.0));
  EXPECT_NEAR(s(0), 1.72317, 1e-12);
  Vector total(2);
  total << 3, 4;
  EXPECT_EQ(split_synthetic(total, Vector::Zero(2)), total);
  EXPECT_EQ(split_synthetic(total, total), Vector::Zero(2));
}

TEST(SplitSynthetic, NamesEveryDeficientChannel) {
  Vector total(3), actual(3);
  total << 1, 5, 1;
  actual << 2, 1, 3;
  try {
    split_synthetic(total, actual);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("channel 1"), std::string::npos);
    EXPECT_EQ(msg.find("channel 2"), std::string::npos);
    EXPECT_NE(msg.find("channel 3"), std::string::npos);
  }
  EXPECT_THROW(split_synthetic(total, Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(split_synthetic(total, Vector::Constant(3, -1)), InvalidArgument);
}

// One random instance of the full certificate -> design -> verify chain.
struct EnsembleCase {
  LinearSystem sys;
  Matrix P_l_f;
  double lambda_u_f;
  DesignSolution sol;
};

std::optional<EnsembleCase> design_random_case(std::mt19937_64& gen) {
  const auto nx = testing::uniform_int(gen, 1, 6);
  const auto ny = testing::uniform_int(gen, 1, nx);
  const LinearSystem sys = testing::random_system(gen, nx, ny);
  const Matrix p_l_f = prescribe_bound(envelope(sys), 1.0 / 16);
  for (double lambda_u_f : {1.0, 0.1, 0.01, 1e-3}) {
    Theorem2Certificate cert;
    try {
      cert = theorem2_certificate(sys, p_l_f, lambda_u_f);
    } catch (const Infeasible&) {
      return std::nullopt;
    }
    if (!check_feasibility(cert, sys.C(), 1.0 / lambda_u_f).feasible()) continue;
    const DesignProblem prob{sys, p_l_f, lambda_u_f, Vector::Ones(ny)};
    return EnsembleCase{sys, p_l_f, lambda_u_f, solve_min_weighted_l1(prob, cert)};
  }
  return std::nullopt;
}

TEST(DesignEnsemble, CertifiedDesignsSatisfyBoundAndShrinkIsMonotone) {
  std::mt19937_64 gen(4242);
  int designed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = design_random_case(gen);
    if (!c) continue;
    ++designed;
    const auto rep = verify_bound(c->sys, c->sol.lambda, c->P_l_f);
    EXPECT_TRUE(rep.satisfied) << "trial " << trial;
    EXPECT_GE(rep.min_eig_gap, -1e-8) << "trial " << trial;

    ShrinkOptions opts;
    const auto shrink = refine_shrink(c->sys, c->sol.lambda, c->P_l_f, opts);
    for (double u : {0.0, 0.25, 0.5, 0.75}) {
      const double gamma = shrink.gamma + u * (1 - shrink.gamma);
      EXPECT_TRUE(verify_bound(c->sys, gamma * c->sol.lambda, c->P_l_f).satisfied)
          << "trial " << trial << " gamma " << gamma;
    }
    if (shrink.gamma < 1 && !shrink.at_floor) {
      const double below = shrink.gamma * (1 - 5 * opts.resolution);
      EXPECT_FALSE(verify_bound(c->sys, below * c->sol.lambda, c->P_l_f).satisfied)
          << "trial " << trial;
    }
  }
  EXPECT_GE(designed, 25);
}

}  // namespace
}  // namespace kfbound
