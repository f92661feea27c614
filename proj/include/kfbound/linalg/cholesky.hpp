#ifndef KFBOUND_LINALG_CHOLESKY_HPP
#define KFBOUND_LINALG_CHOLESKY_HPP

#include <Eigen/Dense>

#include <cmath>

#include "kfbound/linalg/sym_eig.hpp"

namespace kfbound::linalg {

/// Outcome of a positive-definiteness test by Cholesky factorization.
///
/// On success `lower` holds L with L L^T = sym(M) + shift_tol I. On failure
/// `failed_pivot` is the 1-based index of the first non-positive pivot.
template <typename Scalar>
struct CholeskyResult {
  MatrixX<Scalar> lower;
  Eigen::Index failed_pivot = 0;

  bool is_pd() const { return failed_pivot == 0; }
  explicit operator bool() const { return is_pd(); }

  Scalar log_det() const {
    return Scalar(2) * lower.diagonal().array().log().sum();
  }
};

/// Cholesky factor of sym(M) + shift_tol I, or the pivot where it breaks.
///
/// Succeeds exactly when sym(M) ≻ -shift_tol I in floating point. A shift of
/// zero makes this a strict positive-definiteness test.
template <typename Derived>
CholeskyResult<typename Derived::Scalar> chol_psd(const Eigen::MatrixBase<Derived>& m,
                                                  typename Derived::Scalar shift_tol = 0) {
  using Scalar = typename Derived::Scalar;
  require_square(m, "chol_psd");
  const Eigen::Index n = m.rows();

  CholeskyResult<Scalar> out;
  out.lower = MatrixX<Scalar>::Zero(n, n);
  auto& l = out.lower;
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar d = m(j, j) + shift_tol;
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > Scalar(0))) {
      out.failed_pivot = j + 1;
      out.lower.resize(0, 0);
      return out;
    }
    const Scalar ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Scalar s = Scalar(0.5) * (m(i, j) + m(j, i));
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return out;
}

/// True when sym(M) ≻ margin I.
template <typename Derived>
bool is_positive_definite(const Eigen::MatrixBase<Derived>& m,
                          typename Derived::Scalar margin = 0) {
  return chol_psd(m, -margin).is_pd();
}

/// Inverse of a symmetric positive definite matrix from its Cholesky factor.
template <typename Scalar>
MatrixX<Scalar> inverse_from_cholesky(const CholeskyResult<Scalar>& chol) {
  const Eigen::Index n = chol.lower.rows();
  const MatrixX<Scalar> linv =
      chol.lower.template triangularView<Eigen::Lower>().solve(MatrixX<Scalar>::Identity(n, n));
  return linv.transpose() * linv;
}

}  // namespace kfbound::linalg

#endif  // KFBOUND_LINALG_CHOLESKY_HPP
