#ifndef KFBOUND_LINALG_HPP
#define KFBOUND_LINALG_HPP

// Dense real kernels, templated on the Eigen scalar type.

#include "kfbound/linalg/cholesky.hpp"
#include "kfbound/linalg/pinv.hpp"
#include "kfbound/linalg/singular_values.hpp"
#include "kfbound/linalg/spectral_radius.hpp"
#include "kfbound/linalg/sym_eig.hpp"

namespace kfbound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace kfbound

#endif  // KFBOUND_LINALG_HPP
