#include "kfbound/model.hpp"

#include <sstream>
#include <utility>

namespace kfbound {

namespace {

constexpr double kRankTol = 1e-8;
constexpr double kInvertibleTol = 1e-10;
constexpr double kQPsdShift = 1e-10;

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw InvalidArgument(what + ": entries must be finite");
}

LinearSystem::LinearSystem(Matrix a, Matrix b, Matrix c, Matrix q)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), q_(std::move(q)) {
  require_finite(a_, "A");
  require_finite(b_, "B");
  require_finite(c_, "C");
  require_finite(q_, "Q");
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    throw InvalidArgument("A: expected a non-empty square matrix, got " + shape(a_));
  }
  if (b_.rows() != a_.rows() || b_.cols() == 0) {
    throw InvalidArgument("B: expected " + std::to_string(a_.rows()) + " rows, got " + shape(b_));
  }
  if (c_.cols() != a_.rows() || c_.rows() == 0) {
    throw InvalidArgument("C: expected " + std::to_string(a_.rows()) + " columns, got " +
                          shape(c_));
  }
  if (q_.rows() != b_.cols() || q_.cols() != b_.cols()) {
    throw InvalidArgument("Q: expected " + std::to_string(b_.cols()) + "x" +
                          std::to_string(b_.cols()) + ", got " + shape(q_));
  }
  linalg::require_symmetric(q_, linalg::kDefaultSymmetryTol, "Q");
  if (!linalg::chol_psd(q_, kQPsdShift)) {
    throw InvalidArgument("Q: matrix is not positive semidefinite");
  }
  q_ = linalg::symmetrize(q_);
  bqbt_ = linalg::symmetrize(b_ * q_ * b_.transpose());
}

Matrix observability_matrix(const Matrix& a, const Matrix& c) {
  const Eigen::Index n = a.rows();
  Matrix o(c.rows() * n, n);
  Matrix block = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    o.middleRows(k * c.rows(), c.rows()) = block;
    block = block * a;
  }
  return o;
}

Matrix controllability_matrix(const Matrix& a, const Matrix& g) {
  const Eigen::Index n = a.rows();
  Matrix w(n, g.cols() * n);
  Matrix block = g;
  for (Eigen::Index k = 0; k < n; ++k) {
    w.middleCols(k * g.cols(), g.cols()) = block;
    block = a * block;
  }
  return w;
}

ValidationReport validate_system(const LinearSystem& sys) {
  ValidationReport r;
  const Eigen::Index n = sys.nx();

  r.spectral_radius_A = linalg::spectral_radius(sys.A());
  r.a_stable = r.spectral_radius_A < 1.0;

  const Vector sigma = linalg::singular_values(sys.A());
  r.a_invertible = sigma(0) > 0 && sigma(sigma.size() - 1) > kInvertibleTol * sigma(0);

  r.observable = linalg::numerical_rank(observability_matrix(sys.A(), sys.C()), kRankTol) == n;

  const Matrix g = sys.B() * linalg::sqrt_psd(sys.Q());
  r.controllable = linalg::numerical_rank(controllability_matrix(sys.A(), g), kRankTol) == n;

  if (!r.a_stable) {
    r.warnings.emplace_back("A is not stable (spectral radius >= 1); the R = infinity "
                            "envelope bound does not exist");
  }
  if (!r.a_invertible) {
    r.warnings.emplace_back("A is numerically singular; the noise design certificate "
                            "cannot be formed");
  }
  if (!r.observable) {
    r.warnings.emplace_back("[A, C] is not observable; detectability must be confirmed by "
                            "convergence of the Riccati iteration");
  }
  if (!r.controllable) {
    r.warnings.emplace_back("[A, B Q^{1/2}] is not controllable; stabilizability must be "
                            "confirmed by convergence of the Riccati iteration");
  }
  return r;
}

}  // namespace kfbound
