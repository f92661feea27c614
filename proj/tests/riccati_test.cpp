#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kfbound/bounds.hpp"
#include "kfbound/riccati.hpp"
#include "test_util.hpp"

namespace kfbound {
namespace {

using testing::scalar;

LinearSystem scalar_system(double a, double b = 1, double c = 1, double q = 1) {
  return LinearSystem(scalar(a), scalar(b), scalar(c), scalar(q));
}

// Positive root of p^2 + (r(1 - a^2) - 1) p - r = 0, the scalar DARE with b = c = q = 1.
double scalar_dare_oracle(double a, double r) {
  const double lin = r * (1 - a * a) - 1;
  return (-lin + std::sqrt(lin * lin + 4 * r)) / 2;
}

void expect_psd_ordered(const Matrix& hi, const Matrix& lo, double tol) {
  EXPECT_GE(testing::oracle_min_eig(hi - lo), -tol);
}

TEST(SolveDare, ScalarQuadratic) {
  const auto sol = solve_dare(scalar_system(0.5), scalar(1));
  EXPECT_NEAR(sol.P(0, 0), (0.25 + std::sqrt(4.0625)) / 2, 1e-12);
  EXPECT_NEAR(sol.P(0, 0), 1.13278, 1e-5);
  EXPECT_LE(sol.residual, 1e-12);
  EXPECT_GT(sol.iterations, 0);
}

TEST(SolveDare, ScalarAtDesignedNoise) {
  const auto sol = solve_dare(scalar_system(0.5), scalar(2.72317));
  EXPECT_NEAR(sol.P(0, 0), scalar_dare_oracle(0.5, 2.72317), 1e-12);
  EXPECT_NEAR(sol.P(0, 0), 1.2094, 1e-4);
}

TEST(SolveDare, NoDynamicsGivesProcessNoise) {
  Matrix b(2, 1);
  b << 1, -1;
  const LinearSystem sys(Matrix::Zero(2, 2), b, Matrix::Identity(2, 2), scalar(3));
  const auto sol = solve_dare(sys, Matrix::Identity(2, 2));
  EXPECT_LE((sol.P - sys.process_noise()).norm(), 1e-15);
  EXPECT_LE(sol.iterations, 2);
}

TEST(SolveDare, UnstableUnobservedModeDiverges) {
  const LinearSystem sys = scalar_system(2.0, 1, 0, 1);
  EXPECT_THROW(solve_dare(sys, scalar(1)), Diverged);
}

TEST(SolveDare, IterationCapReported) {
  SolverOptions opts;
  opts.max_iters = 3;
  EXPECT_THROW(solve_dare(scalar_system(0.99), scalar(100), opts), NotConverged);
}

TEST(SolveDare, RejectsBadNoiseAndOptions) {
  const LinearSystem sys = scalar_system(0.5);
  EXPECT_THROW(solve_dare(sys, scalar(0)), InvalidArgument);
  EXPECT_THROW(solve_dare(sys, Matrix::Identity(2, 2)), InvalidArgument);
  SolverOptions bad;
  bad.rel_tol = 0;
  EXPECT_THROW(solve_dare(sys, scalar(1), bad), InvalidArgument);
}

TEST(SolveDare, RandomResidualSymmetryAndPsd) {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 50; ++trial) {
    const auto nx = testing::uniform_int(gen, 1, 5);
    const auto ny = testing::uniform_int(gen, 1, 5);
    const LinearSystem sys = testing::random_system(gen, nx, ny);
    const Matrix r = testing::random_spd(gen, ny, 0.1);
    const auto sol = solve_dare(sys, r);
    EXPECT_LE(sol.residual, 1e-9 * std::max(1.0, sol.P.norm()));
    EXPECT_LE(dare_residual(sys, r, sol.P), 1e-9 * std::max(1.0, sol.P.norm()));
    EXPECT_LE((sol.P - sol.P.transpose()).norm(), 1e-12);
    EXPECT_GE(testing::oracle_min_eig(sol.P), -1e-10);
  }
}

TEST(SolveDare, MonotoneInNoise) {
  std::mt19937_64 gen(202);
  for (int trial = 0; trial < 100; ++trial) {
    const auto nx = testing::uniform_int(gen, 1, 5);
    const auto ny = testing::uniform_int(gen, 1, 5);
    const LinearSystem sys = testing::random_system(gen, nx, ny);
    const Matrix r2 = testing::random_spd(gen, ny, 0.05);
    const Matrix r1 = r2 + testing::random_spd(gen, ny, 0.0);
    const Matrix p1 = solve_dare(sys, r1).P;
    const Matrix p2 = solve_dare(sys, r2).P;
    expect_psd_ordered(p1, p2, 1e-8);
  }
}

TEST(SolveDare, BracketedByEnvelope) {
  std::mt19937_64 gen(303);
  for (int trial = 0; trial < 30; ++trial) {
    const auto nx = testing::uniform_int(gen, 1, 5);
    const auto ny = testing::uniform_int(gen, 1, nx);
    const LinearSystem sys = testing::random_system(gen, nx, ny);
    const auto env = envelope(sys);
    const Matrix r = testing::random_spd(gen, ny, 0.01) * testing::uniform(gen, 0.01, 100);
    const Matrix p = solve_dare(sys, r).P;
    expect_psd_ordered(p, env.P_lb, 1e-8);
    expect_psd_ordered(env.P_ub, p, 1e-8);
  }
}

TEST(SolveDareZeroR, ScalarPerfectMeasurement) {
  const auto sol = solve_dare_zero_r(scalar_system(0.5));
  EXPECT_NEAR(sol.P(0, 0), 1.0, 1e-12);
}

TEST(SolveDareZeroR, SquareInvertibleCGivesIdentity) {
  std::mt19937_64 gen(7);
  const Matrix a = testing::random_contraction(gen, 4, 0.9);
  Matrix c = testing::random_matrix(gen, 4, 4) + 3 * Matrix::Identity(4, 4);
  const Matrix i = Matrix::Identity(4, 4);
  const auto sol = solve_dare_zero_r(LinearSystem(a, i, c, i));
  EXPECT_LE((sol.P - i).norm(), 1e-10);
}

TEST(SolveDareZeroR, IllConditionedMeasurement) {
  // R = 1e-6 I sits ~1e-2 away from the limit here; the check must still pass.
  Matrix a(2, 2);
  a << -0.0056, 0.029, 0.203, 0.68;
  Matrix c(2, 2);
  c << 1, 0, 0, 0.01;
  const Matrix i = Matrix::Identity(2, 2);
  const auto sol = solve_dare_zero_r(LinearSystem(a, i, c, i));
  EXPECT_LE((sol.P - i).norm(), 1e-8);
}

TEST(SolveDareZeroR, PartialMeasurementMatchesLimit) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 0.5;
  a(1, 1) = 0.2;
  Matrix c(1, 2);
  c << 1, 0;
  const Matrix i = Matrix::Identity(2, 2);
  const LinearSystem sys(a, i, c, i);
  const auto sol = solve_dare_zero_r(sys);
  // Measured state collapses to q; the unmeasured one follows its own Stein series.
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  expected(1, 1) = 1.0 / 0.96;
  EXPECT_LE((sol.P - expected).norm(), 1e-10);
  const auto eps = solve_dare(sys, scalar(1e-8));
  EXPECT_LE((eps.P - sol.P).norm(), 1e-4 * sol.P.norm());
}

TEST(SolveStein, Examples) {
  std::mt19937_64 gen(1);
  const Matrix w = testing::random_spd(gen, 3);
  EXPECT_LE((solve_stein(Matrix::Zero(3, 3), w) - w).norm(), 1e-15);

  EXPECT_NEAR(solve_stein(scalar(0.5), scalar(1))(0, 0), 4.0 / 3.0, 1e-14);

  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 0.9;
  a(1, 1) = 0.5;
  const Matrix p = solve_stein(a, Matrix::Identity(2, 2));
  EXPECT_NEAR(p(0, 0), 1 / 0.19, 1e-12);
  EXPECT_NEAR(p(1, 1), 1 / 0.75, 1e-12);
  EXPECT_NEAR(p(0, 1), 0, 1e-15);
}

TEST(SolveStein, RandomResidual) {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = testing::uniform_int(gen, 1, 8);
    const Matrix a = testing::random_contraction(gen, n, testing::uniform(gen, 0.1, 0.99));
    const Matrix w = testing::random_spd(gen, n);
    const Matrix p = solve_stein(a, w);
    EXPECT_LE(stein_residual(a, w, p), 1e-9 * std::max(1.0, p.norm()));
  }
}

TEST(SolveStein, RejectsUnstable) {
  EXPECT_THROW(solve_stein(scalar(1.0), scalar(1)), InvalidArgument);
  EXPECT_THROW(solve_stein(scalar(0.5), Matrix::Identity(2, 2)), InvalidArgument);
}

TEST(UareResidual, GoldenRatio) {
  UareParams p{scalar(0), scalar(1), scalar(1), scalar(1), 1.0};
  const double golden = (1 + std::sqrt(5.0)) / 2;
  EXPECT_LE(uare_r_residual(p, scalar(golden)), 1e-10);
  EXPECT_LE(uare_r_residual_inversion_form(p, scalar(golden)), 1e-10);
  EXPECT_GT(uare_r_residual(p, scalar(golden + 1)), 0.1);
}

TEST(UareResidual, ContinuousTime) {
  UareParams p{scalar(-1), scalar(1), scalar(1), scalar(1), 0.0};
  const double root = std::sqrt(2.0) - 1;
  EXPECT_LE(uare_r_residual(p, scalar(root)), 1e-10);
  EXPECT_GT(uare_r_residual(p, scalar(root + 1)), uare_r_residual(p, scalar(root)));
}

TEST(UareResidual, SubstitutionMatchesDare) {
  std::mt19937_64 gen(505);
  for (int trial = 0; trial < 50; ++trial) {
    const auto nx = testing::uniform_int(gen, 1, 5);
    const auto ny = testing::uniform_int(gen, 1, 5);
    const LinearSystem sys = testing::random_system(gen, nx, ny);
    const Matrix r = testing::random_spd(gen, ny, 0.1);
    const Matrix p = solve_dare(sys, r).P;
    const UareParams params = to_uare_params(sys, r);
    EXPECT_LE(uare_r_residual(params, p), 1e-8);
    EXPECT_LE(uare_r_residual_inversion_form(params, p), 1e-8);
    const Matrix off = p + Matrix::Identity(nx, nx);
    EXPECT_GT(uare_r_residual(params, off), uare_r_residual(params, p));
  }
}

TEST(UareResidual, SubstitutionPreservesCurvatureBound) {
  std::mt19937_64 gen(606);
  for (int trial = 0; trial < 50; ++trial) {
    const auto nx = testing::uniform_int(gen, 1, 6);
    const LinearSystem sys = testing::random_system(gen, nx, 1);
    const UareParams params = to_uare_params(sys, scalar(1));
    const Matrix& a = params.A;
    const Matrix i = Matrix::Identity(nx, nx);
    EXPECT_NEAR(testing::oracle_min_eig(a + a.transpose() + a.transpose() * a),
                testing::oracle_min_eig(sys.A() * sys.A().transpose() - i), 1e-10);
  }
}

TEST(UareResidual, InversionFormScalesWithDelta) {
  std::mt19937_64 gen(707);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = testing::uniform_int(gen, 1, 4);
    const auto m = testing::uniform_int(gen, 1, 4);
    UareParams p;
    p.A = testing::random_matrix(gen, n, n) * 0.3;
    p.G = testing::random_matrix(gen, n, m);
    p.Q = testing::random_spd(gen, n);
    p.R = testing::random_spd(gen, m);
    p.delta = testing::uniform(gen, 0.1, 2.0);
    const Matrix x = testing::random_spd(gen, n, 0.5);
    EXPECT_NEAR(uare_r_residual_inversion_form(p, x), p.delta * uare_r_residual(p, x),
                1e-9 * std::max(1.0, uare_r_residual_inversion_form(p, x)));
  }
}

TEST(UareParamsValidate, RejectsBadShapes) {
  UareParams p{scalar(0), scalar(1), scalar(1), scalar(1), -1.0};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.delta = 1;
  p.R = Matrix::Identity(2, 2);
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(KalmanGain, Examples) {
  const LinearSystem sys = scalar_system(0.5);
  EXPECT_DOUBLE_EQ(kalman_gain(sys, scalar(1), scalar(1))(0, 0), 0.5);
  EXPECT_LE(kalman_gain(sys, scalar(1), scalar(1e12)).norm(), 1e-10);
  EXPECT_EQ(kalman_gain(sys, scalar(0), scalar(1))(0, 0), 0.0);
  EXPECT_THROW(kalman_gain(sys, scalar(0), scalar(0)), InvalidArgument);
}

}  // namespace
}  // namespace kfbound
