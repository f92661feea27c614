#ifndef KFBOUND_LINALG_SYM_EIG_HPP
#define KFBOUND_LINALG_SYM_EIG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kfbound/error.hpp"

namespace kfbound::linalg {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Eigen-decomposition of a real symmetric matrix.
///
/// eigenvalues are sorted non-increasing; column i of eigenvectors is the
/// unit eigenvector paired with eigenvalues(i).
template <typename Scalar>
struct SymEig {
  VectorX<Scalar> eigenvalues;
  MatrixX<Scalar> eigenvectors;

  Scalar max() const { return eigenvalues(0); }
  Scalar min() const { return eigenvalues(eigenvalues.size() - 1); }
};

inline constexpr double kDefaultSymmetryTol = 1e-9;

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InvalidArgument(std::string(what) + ": expected a square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar tol,
                       const char* what) {
  require_square(m, what);
  const auto asym = (m - m.transpose()).norm();
  if (asym > tol * m.norm()) {
    throw InvalidArgument(std::string(what) + ": matrix is not symmetric (||M - M^T||_F = " +
                          std::to_string(static_cast<double>(asym)) + ")");
  }
}

/// Symmetric eigensolver by cyclic Jacobi rotations.
///
/// The input is symmetrized as (M + M^T)/2 first. Rotations are applied
/// row-cyclically until every off-diagonal entry is negligible against its
/// two diagonal partners. Output is deterministic for identical input.
template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& m,
                                         typename Derived::Scalar tol = kDefaultSymmetryTol) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  require_symmetric(m, tol, "sym_eig");

  const Eigen::Index n = m.rows();
  MatrixX<Scalar> a = (m + m.transpose()) / Scalar(2);
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);

  constexpr int kMaxSweeps = 100;
  bool converged = (n <= 1);
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += abs(a(p, q));
    }
    if (off == Scalar(0)) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar app = a(p, p);
        const Scalar aqq = a(q, q);
        const Scalar g = Scalar(100) * abs(apq);
        if (abs(app) + g == abs(app) && abs(aqq) + g == abs(aqq)) {
          a(p, q) = a(q, p) = Scalar(0);
          continue;
        }
        const Scalar theta = (aqq - app) / (Scalar(2) * apq);
        Scalar t = Scalar(1) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
        if (theta < Scalar(0)) t = -t;
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;

        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw NumericalFailure("sym_eig: Jacobi sweeps did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymEig<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    out.eigenvalues(i) = a(src, src);
    out.eigenvectors.col(i) = v.col(src);
  }
  return out;
}

/// Smallest eigenvalue of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  return sym_eig(m).min();
}

/// Symmetric PSD square root V diag(sqrt(max(λ, 0))) V^T.
template <typename Derived>
MatrixX<typename Derived::Scalar> sqrt_psd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(m);
  const VectorX<Scalar> root = eig.eigenvalues.cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors * root.asDiagonal() * eig.eigenvectors.transpose();
}

/// (M + M^T)/2.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

}  // namespace kfbound::linalg

#endif  // KFBOUND_LINALG_SYM_EIG_HPP
