#ifndef KFBOUND_KALMAN_HPP
#define KFBOUND_KALMAN_HPP

#include <cstdint>
#include <vector>

#include "kfbound/linalg.hpp"
#include "kfbound/model.hpp"
#include "kfbound/riccati.hpp"

namespace kfbound {

struct FilterState {
  Vector mean_prior;
  Vector mean_post;
  Matrix cov_prior;
  Matrix cov_post;
  Matrix gain;
  long step = 0;

  /// Filter state at k = 0: posterior mean and covariance set to the
  /// initial-state distribution.
  static FilterState initial(const LinearSystem& sys, const Vector& x0_mean, const Matrix& x0_cov);
};

struct SimulationConfig {
  Vector x0_mean;
  Matrix x0_cov;
  long steps = 200;
  long trials = 1000;
  std::uint64_t master_seed = 0;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;

  void validate(const LinearSystem& sys) const;
};

struct SimulationReport {
  /// Sample covariance of x_k - mu_k^- across trials at the final step.
  Matrix empirical_cov;
  /// Sample mean of the same error.
  Vector empirical_mean;
  /// Deterministic P_k^- for k = 1..steps.
  std::vector<Matrix> prior_trajectory;
  /// Steady-state prior covariance from solve_dare.
  Matrix dare_limit;
  /// ||empirical_cov - dare_limit||_F / ||dare_limit||_F
  double rel_error = 0;
  long trials = 0;
  long steps = 0;
};

/// One predict/update cycle of the Kalman filter. The covariance update
/// uses (I - K C) P^- followed by re-symmetrization.
FilterState kf_step(const FilterState& state, const LinearSystem& sys, const Matrix& r,
                    const Vector& y);

/// Independent truth + filter trajectories. Trial i draws from a generator
/// seeded by trial_seed(master_seed, i), so results do not depend on thread
/// count or scheduling.
SimulationReport simulate(const LinearSystem& sys, const Matrix& r, const SimulationConfig& cfg,
                          const SolverOptions& opts = {});

/// Seed-splitting rule for trial streams (splitmix64 finalizer).
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial);

}  // namespace kfbound

#endif  // KFBOUND_KALMAN_HPP
