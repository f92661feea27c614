#ifndef KFBOUND_LINALG_SINGULAR_VALUES_HPP
#define KFBOUND_LINALG_SINGULAR_VALUES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "kfbound/linalg/sym_eig.hpp"

namespace kfbound::linalg {

/// Singular values, non-increasing, min(rows, cols) of them.
///
/// One-sided Jacobi (Hestenes) on the taller orientation: column pairs are
/// rotated until mutually orthogonal, then the column norms are the σ_i.
/// Small singular values come out with relative accuracy, which the rank
/// tests downstream depend on.
template <typename Derived>
VectorX<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;

  MatrixX<Scalar> u = m.rows() >= m.cols() ? MatrixX<Scalar>(m) : MatrixX<Scalar>(m.transpose());
  const Eigen::Index n = u.cols();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  constexpr int kMaxSweeps = 100;
  bool rotated = true;
  for (int sweep = 0; sweep < kMaxSweeps && rotated; ++sweep) {
    rotated = false;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar alpha = u.col(p).squaredNorm();
        const Scalar beta = u.col(q).squaredNorm();
        const Scalar gamma = u.col(p).dot(u.col(q));
        if (gamma == Scalar(0) || abs(gamma) <= eps * sqrt(alpha * beta)) continue;
        rotated = true;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        Scalar t = Scalar(1) / (abs(zeta) + sqrt(Scalar(1) + zeta * zeta));
        if (zeta < Scalar(0)) t = -t;
        const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Eigen::Index k = 0; k < u.rows(); ++k) {
          const Scalar up = u(k, p);
          const Scalar uq = u(k, q);
          u(k, p) = c * up - s * uq;
          u(k, q) = s * up + c * uq;
        }
      }
    }
  }
  if (rotated) {
    throw NumericalFailure("singular_values: one-sided Jacobi did not converge");
  }

  VectorX<Scalar> sigma = u.colwise().norm().transpose();
  std::sort(sigma.data(), sigma.data() + sigma.size(), std::greater<Scalar>());
  return sigma;
}

/// Largest singular value (0 for an empty matrix).
template <typename Derived>
typename Derived::Scalar max_singular_value(const Eigen::MatrixBase<Derived>& m) {
  const auto s = singular_values(m);
  return s.size() == 0 ? typename Derived::Scalar(0) : s(0);
}

/// Numerical rank: count of σ_i > rel_tol σ_1.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m,
                            typename Derived::Scalar rel_tol = 1e-8) {
  const auto s = singular_values(m);
  if (s.size() == 0 || s(0) == 0) return 0;
  return (s.array() > rel_tol * s(0)).count();
}

}  // namespace kfbound::linalg

#endif  // KFBOUND_LINALG_SINGULAR_VALUES_HPP
