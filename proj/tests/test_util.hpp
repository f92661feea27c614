#ifndef KFBOUND_TESTS_TEST_UTIL_HPP
#define KFBOUND_TESTS_TEST_UTIL_HPP

#include <random>

#include "kfbound/linalg.hpp"
#include "kfbound/model.hpp"

namespace kfbound::testing {

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = d(gen);
  }
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& gen, Eigen::Index n) {
  const Matrix m = random_matrix(gen, n, n);
  return (m + m.transpose()) / 2.0;
}

/// G G^T + floor I.
inline Matrix random_spd(std::mt19937_64& gen, Eigen::Index n, double floor = 0.1) {
  const Matrix g = random_matrix(gen, n, n);
  return g * g.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n);
}

/// Matrix with spectral norm exactly `rho` (so spectral radius <= rho).
inline Matrix random_contraction(std::mt19937_64& gen, Eigen::Index n, double rho) {
  const Matrix g = random_matrix(gen, n, n);
  Eigen::JacobiSVD<Matrix> svd(g);
  return rho * g / svd.singularValues()(0);
}

inline int uniform_int(std::mt19937_64& gen, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(gen);
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

/// Stable, invertible A; full-row-rank C; PD Q; B = I.
inline LinearSystem random_system(std::mt19937_64& gen, Eigen::Index nx, Eigen::Index ny) {
  const Matrix a = random_contraction(gen, nx, uniform(gen, 0.3, 0.95));
  const Matrix c = random_matrix(gen, ny, nx);
  const Matrix q = random_spd(gen, nx, 0.2);
  return LinearSystem(a, Matrix::Identity(nx, nx), c, q);
}

/// Smallest eigenvalue through Eigen's own solver, independent of the
/// Jacobi path under test.
inline double oracle_min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.transpose()) / 2.0, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

}  // namespace kfbound::testing

#endif  // KFBOUND_TESTS_TEST_UTIL_HPP
