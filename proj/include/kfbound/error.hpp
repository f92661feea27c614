#ifndef KFBOUND_ERROR_HPP
#define KFBOUND_ERROR_HPP

#include <stdexcept>
#include <string>

namespace kfbound {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller handed in something that breaks an operation's precondition
/// (shape mismatch, asymmetric input, out-of-range scalar, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested covariance bound cannot be certified for this system.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to produce a trustworthy answer.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Riccati iterate blew past the divergence cap (undetectable unstable mode).
class Diverged : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// Iteration budget exhausted before the stopping rule was met.
class NotConverged : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace kfbound

#endif  // KFBOUND_ERROR_HPP
