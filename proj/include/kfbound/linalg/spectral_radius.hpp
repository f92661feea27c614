#ifndef KFBOUND_LINALG_SPECTRAL_RADIUS_HPP
#define KFBOUND_LINALG_SPECTRAL_RADIUS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

#include "kfbound/linalg/sym_eig.hpp"

namespace kfbound::linalg {

/// Reduce a square matrix to upper Hessenberg form by Householder reflections.
template <typename Scalar>
void hessenberg_reduce(MatrixX<Scalar>& h) {
  const Eigen::Index n = h.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index len = n - k - 1;
    VectorX<Scalar> v = h.col(k).segment(k + 1, len);
    const Scalar xnorm = v.norm();
    if (xnorm == Scalar(0)) continue;
    const Scalar alpha = v(0) > Scalar(0) ? -xnorm : xnorm;
    v(0) -= alpha;
    const Scalar vnorm = v.norm();
    if (vnorm == Scalar(0)) continue;
    v /= vnorm;
    // H <- (I - 2vv^T) H (I - 2vv^T) on the trailing block.
    auto rows = h.bottomRows(len);
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> vt_rows = v.transpose() * rows;
    rows.noalias() -= Scalar(2) * v * vt_rows;
    auto cols = h.rightCols(len);
    const VectorX<Scalar> cols_v = cols * v;
    cols.noalias() -= Scalar(2) * cols_v * v.transpose();
    h.col(k).segment(k + 2, len - 1).setZero();
  }
}

/// All eigenvalues of an upper Hessenberg matrix (destroyed in place) by
/// Francis double-shift QR with deflation into 1x1 and 2x2 blocks.
template <typename Scalar>
std::vector<std::complex<Scalar>> hessenberg_eigenvalues(MatrixX<Scalar>& a) {
  using std::abs;
  using std::sqrt;
  const int n = static_cast<int>(a.rows());
  std::vector<std::complex<Scalar>> out(static_cast<std::size_t>(n));
  if (n == 0) return out;

  Scalar anorm = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += abs(a(i, j));
  }

  constexpr int kMaxIterationsPerEigenvalue = 60;
  auto sign = [](Scalar mag, Scalar s) { return s >= Scalar(0) ? abs(mag) : -abs(mag); };

  int nn = n - 1;
  Scalar t = 0;
  Scalar p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      // Look for a single small subdiagonal element.
      for (l = nn; l >= 1; --l) {
        s = abs(a(l - 1, l - 1)) + abs(a(l, l));
        if (s == Scalar(0)) s = anorm;
        if (abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        out[static_cast<std::size_t>(nn)] = {x + t, 0};
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          // Trailing 2x2 block.
          p = Scalar(0.5) * (y - x);
          q = p * p + w;
          z = sqrt(abs(q));
          x += t;
          if (q >= Scalar(0)) {
            z = p + sign(z, p);
            const Scalar hi = x + z;
            const Scalar lo = z != Scalar(0) ? x - w / z : hi;
            out[static_cast<std::size_t>(nn - 1)] = {hi, 0};
            out[static_cast<std::size_t>(nn)] = {lo, 0};
          } else {
            out[static_cast<std::size_t>(nn - 1)] = {x + p, z};
            out[static_cast<std::size_t>(nn)] = {x + p, -z};
          }
          nn -= 2;
        } else {
          if (its == kMaxIterationsPerEigenvalue) {
            throw NumericalFailure("spectral_radius: QR iteration did not converge");
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = abs(a(nn, nn - 1)) + abs(a(nn - 1, nn - 2));
            y = x = Scalar(0.75) * s;
            w = Scalar(-0.4375) * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = abs(p) + abs(q) + abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const Scalar u = abs(a(m, m - 1)) * (abs(q) + abs(r));
            const Scalar v = abs(p) * (abs(a(m - 1, m - 1)) + abs(z) + abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0;
            if (i != m + 2) a(i, i - 3) = 0;
          }
          // Double-shift QR sweep on rows/cols l..nn.
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = abs(p) + abs(q) + abs(r);
              if (x != Scalar(0)) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = sign(sqrt(p * p + q * q + r * r), p);
            if (s != Scalar(0)) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return out;
}

/// Eigenvalues (possibly complex) of a general square matrix, values only.
template <typename Derived>
std::vector<std::complex<typename Derived::Scalar>> general_eigenvalues(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require_square(m, "general_eigenvalues");
  MatrixX<Scalar> h = m;
  hessenberg_reduce(h);
  return hessenberg_eigenvalues(h);
}

/// max |λ| over the eigenvalues of a square matrix.
template <typename Derived>
typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Scalar rho = 0;
  for (const auto& l : general_eigenvalues(m)) rho = std::max(rho, std::abs(l));
  return rho;
}

}  // namespace kfbound::linalg

#endif  // KFBOUND_LINALG_SPECTRAL_RADIUS_HPP
