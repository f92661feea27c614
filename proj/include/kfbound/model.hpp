#ifndef KFBOUND_MODEL_HPP
#define KFBOUND_MODEL_HPP

#include <string>
#include <vector>

#include "kfbound/linalg.hpp"

namespace kfbound {

/// Discrete-time linear Gaussian system
///
///   x_{k+1} = A x_k + B w_k,   w_k ~ N(0, Q)
///   y_k     = C x_k + n_k,     n_k ~ N(0, R)
///
/// R is the design variable and is therefore not part of the model.
/// Immutable once constructed; the constructor enforces consistent shapes,
/// finite entries and a symmetric PSD Q.
class LinearSystem {
 public:
  LinearSystem(Matrix a, Matrix b, Matrix c, Matrix q);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const Matrix& Q() const { return q_; }

  Eigen::Index nx() const { return a_.rows(); }
  Eigen::Index nw() const { return b_.cols(); }
  Eigen::Index ny() const { return c_.rows(); }

  /// B Q B^T, the state-space process noise covariance.
  const Matrix& process_noise() const { return bqbt_; }

 private:
  Matrix a_, b_, c_, q_, bqbt_;
};

struct ValidationReport {
  double spectral_radius_A = 0;
  bool a_stable = false;
  bool a_invertible = false;
  bool observable = false;
  bool controllable = false;
  std::vector<std::string> warnings;
};

/// Stability, invertibility and rank tests on the model.
///
/// Observability and controllability stand in for detectability and
/// stabilizability; a failed rank test produces a warning, not an error,
/// since the Riccati iteration is the operational detectability check.
ValidationReport validate_system(const LinearSystem& sys);

/// [C; CA; ...; CA^{n-1}]
Matrix observability_matrix(const Matrix& a, const Matrix& c);

/// [G, AG, ..., A^{n-1}G]
Matrix controllability_matrix(const Matrix& a, const Matrix& g);

/// Throws InvalidArgument unless every entry is finite.
void require_finite(const Matrix& m, const std::string& what);

}  // namespace kfbound

#endif  // KFBOUND_MODEL_HPP
