#include "kfbound/kalman.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <thread>

namespace kfbound {

namespace {

void require_vector(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw InvalidArgument(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                          std::to_string(v.size()));
  }
}

void require_shape(const Matrix& m, Eigen::Index r, Eigen::Index c, const char* what) {
  if (m.rows() != r || m.cols() != c) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(r) + "x" +
                          std::to_string(c) + ", got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

Vector standard_normal(std::mt19937_64& gen, std::normal_distribution<double>& dist,
                       Eigen::Index n) {
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = dist(gen);
  return z;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
  std::uint64_t z = master_seed + (trial + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

FilterState FilterState::initial(const LinearSystem& sys, const Vector& x0_mean,
                                 const Matrix& x0_cov) {
  require_vector(x0_mean, sys.nx(), "x0_mean");
  require_shape(x0_cov, sys.nx(), sys.nx(), "x0_cov");
  FilterState s;
  s.mean_prior = x0_mean;
  s.mean_post = x0_mean;
  s.cov_prior = x0_cov;
  s.cov_post = x0_cov;
  s.gain = Matrix::Zero(sys.nx(), sys.ny());
  s.step = 0;
  return s;
}

void SimulationConfig::validate(const LinearSystem& sys) const {
  if (steps < 1) throw InvalidArgument("simulate: steps must be at least 1");
  if (trials < 1) throw InvalidArgument("simulate: trials must be at least 1");
  require_vector(x0_mean, sys.nx(), "simulate: x0_mean");
  require_shape(x0_cov, sys.nx(), sys.nx(), "simulate: x0_cov");
  linalg::require_symmetric(x0_cov, linalg::kDefaultSymmetryTol, "simulate: x0_cov");
  if (!linalg::chol_psd(x0_cov, 1e-10)) {
    throw InvalidArgument("simulate: x0_cov must be positive semidefinite");
  }
}

FilterState kf_step(const FilterState& state, const LinearSystem& sys, const Matrix& r,
                    const Vector& y) {
  require_vector(state.mean_post, sys.nx(), "kf_step: mean_post");
  require_shape(state.cov_post, sys.nx(), sys.nx(), "kf_step: cov_post");
  require_shape(r, sys.ny(), sys.ny(), "kf_step: R");
  require_vector(y, sys.ny(), "kf_step: y");
  const Matrix& a = sys.A();
  const Matrix& c = sys.C();

  FilterState next;
  next.step = state.step + 1;
  next.cov_prior = linalg::symmetrize(a * state.cov_post * a.transpose() + sys.process_noise());
  next.gain = kalman_gain(sys, next.cov_prior, r);
  next.mean_prior = a * state.mean_post;
  next.mean_post = next.mean_prior + next.gain * (y - c * next.mean_prior);
  const Matrix i = Matrix::Identity(sys.nx(), sys.nx());
  next.cov_post = linalg::symmetrize((i - next.gain * c) * next.cov_prior);
  return next;
}

SimulationReport simulate(const LinearSystem& sys, const Matrix& r, const SimulationConfig& cfg,
                          const SolverOptions& opts) {
  cfg.validate(sys);
  require_shape(r, sys.ny(), sys.ny(), "simulate: R");
  linalg::require_symmetric(r, linalg::kDefaultSymmetryTol, "simulate: R");
  if (!linalg::chol_psd(r)) throw InvalidArgument("simulate: R must be positive definite");

  const Eigen::Index nx = sys.nx();
  const Eigen::Index ny = sys.ny();
  const Matrix& a = sys.A();
  const Matrix& c = sys.C();

  SimulationReport rep;
  rep.trials = cfg.trials;
  rep.steps = cfg.steps;

  // The covariance recursion does not depend on the data, so the gain
  // sequence is shared by every trial.
  std::vector<Matrix> gains;
  gains.reserve(static_cast<std::size_t>(cfg.steps));
  rep.prior_trajectory.reserve(static_cast<std::size_t>(cfg.steps));
  {
    FilterState s = FilterState::initial(sys, cfg.x0_mean, cfg.x0_cov);
    const Vector y0 = Vector::Zero(ny);
    for (long k = 0; k < cfg.steps; ++k) {
      s = kf_step(s, sys, r, y0);
      rep.prior_trajectory.push_back(s.cov_prior);
      gains.push_back(s.gain);
    }
  }

  const Matrix x0_root = linalg::sqrt_psd(cfg.x0_cov);
  const Matrix w_root = sys.B() * linalg::sqrt_psd(sys.Q());
  const Matrix n_root = linalg::sqrt_psd(r);
  const Eigen::Index nw = sys.nw();

  Matrix errors(nx, cfg.trials);
  auto run_trial = [&](long trial) {
    std::mt19937_64 gen(trial_seed(cfg.master_seed, static_cast<std::uint64_t>(trial)));
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector x = cfg.x0_mean + x0_root * standard_normal(gen, dist, nx);
    Vector mean_post = cfg.x0_mean;
    Vector mean_prior(nx);
    for (long k = 0; k < cfg.steps; ++k) {
      x = a * x + w_root * standard_normal(gen, dist, nw);
      const Vector y = c * x + n_root * standard_normal(gen, dist, ny);
      mean_prior.noalias() = a * mean_post;
      mean_post = mean_prior + gains[static_cast<std::size_t>(k)] * (y - c * mean_prior);
    }
    errors.col(trial) = x - mean_prior;
  };

  unsigned threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.trials)));
  if (threads == 1) {
    for (long t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned id = 0; id < threads; ++id) {
      pool.emplace_back([&, id] {
        for (long t = id; t < cfg.trials; t += threads) run_trial(t);
      });
    }
  }

  // Reduction in trial-index order.
  rep.empirical_mean = Vector::Zero(nx);
  for (long t = 0; t < cfg.trials; ++t) rep.empirical_mean += errors.col(t);
  rep.empirical_mean /= static_cast<double>(cfg.trials);
  rep.empirical_cov = Matrix::Zero(nx, nx);
  for (long t = 0; t < cfg.trials; ++t) {
    const Vector d = errors.col(t) - rep.empirical_mean;
    rep.empirical_cov += d * d.transpose();
  }
  rep.empirical_cov /= static_cast<double>(std::max(1L, cfg.trials - 1));

  rep.dare_limit = solve_dare(sys, r, opts).P;
  rep.rel_error = (rep.empirical_cov - rep.dare_limit).norm() / rep.dare_limit.norm();
  return rep;
}

}  // namespace kfbound
