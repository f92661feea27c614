#ifndef KFBOUND_LINALG_PINV_HPP
#define KFBOUND_LINALG_PINV_HPP

#include <Eigen/Dense>

#include <cmath>

#include "kfbound/linalg/sym_eig.hpp"

namespace kfbound::linalg {

/// Moore–Penrose pseudo-inverse of a symmetric matrix.
///
/// Eigenvalues with |λ_i| <= rank_tol * max|λ| are treated as zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> pinv_sym(const Eigen::MatrixBase<Derived>& m,
                                           typename Derived::Scalar rank_tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(m);
  const Scalar top = eig.eigenvalues.cwiseAbs().maxCoeff();
  VectorX<Scalar> inv = VectorX<Scalar>::Zero(eig.eigenvalues.size());
  if (top > Scalar(0)) {
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
      const Scalar l = eig.eigenvalues(i);
      if (std::abs(l) > rank_tol * top) inv(i) = Scalar(1) / l;
    }
  }
  return eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace kfbound::linalg

#endif  // KFBOUND_LINALG_PINV_HPP
