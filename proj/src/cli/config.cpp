#include "kfbound/cli/config.hpp"

#include <cmath>
#include <numbers>

#include "json_io.hpp"

namespace kfbound::cli {

namespace {

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

const json& require_key(const json& obj, const char* key, const std::string& path) {
  const json* v = find(obj, key);
  if (v == nullptr) throw ConfigError(path + "." + key, "missing required key");
  return *v;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

long positive_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) {
    throw ConfigError(path, "expected a positive integer");
  }
  return static_cast<long>(j.get<long long>());
}

std::uint64_t seed_value(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& path) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(path, "expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                                ", got " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

void require_symmetric(const Matrix& m, const std::string& path) {
  if ((m - m.transpose()).norm() > linalg::kDefaultSymmetryTol * m.norm()) {
    throw ConfigError(path, "matrix is not symmetric");
  }
}

LinearSystem parse_system(const json& j) {
  require_object(j, "system");
  const Matrix a = matrix_from_json(require_key(j, "A", "system"), "system.A");
  const Matrix b = matrix_from_json(require_key(j, "B", "system"), "system.B");
  const Matrix c = matrix_from_json(require_key(j, "C", "system"), "system.C");
  const Matrix q = matrix_from_json(require_key(j, "Q", "system"), "system.Q");
  const Eigen::Index n = a.rows();
  require_shape(a, n, n, "system.A");
  require_shape(b, n, b.cols(), "system.B");
  require_shape(c, c.rows(), n, "system.C");
  require_shape(q, b.cols(), b.cols(), "system.Q");
  require_symmetric(q, "system.Q");
  if (!linalg::chol_psd(q, 1e-10)) {
    throw ConfigError("system.Q", "matrix is not positive semidefinite");
  }
  return LinearSystem(a, b, c, q);
}

GeneratorSpec parse_generator(const json& j) {
  require_object(j, "generate");
  GeneratorSpec g;
  g.n = static_cast<int>(positive_integer(require_key(j, "n", "generate"), "generate.n"));
  g.rho = number(require_key(j, "rho", "generate"), "generate.rho");
  if (!(g.rho > 0 && g.rho < 1)) throw ConfigError("generate.rho", "must lie in (0, 1)");
  g.seed = seed_value(require_key(j, "seed", "generate"), "generate.seed");
  return g;
}

DesignParams parse_design(const json& j, const LinearSystem& sys) {
  require_object(j, "design");
  DesignParams d;
  if (const json* a = find(j, "alpha")) {
    d.alpha = number(*a, "design.alpha");
    if (!(*d.alpha > 0 && *d.alpha < 1)) throw ConfigError("design.alpha", "must lie in (0, 1)");
  }
  d.lambda_u_f = number(require_key(j, "lambda_u_f", "design"), "design.lambda_u_f");
  if (!(d.lambda_u_f > 0)) throw ConfigError("design.lambda_u_f", "must be positive");
  if (const json* w = find(j, "weights")) {
    d.weights = vector_from_json(*w, "design.weights");
    if (d.weights->size() != sys.ny()) {
      throw ConfigError("design.weights", "expected " + std::to_string(sys.ny()) + " entries");
    }
    if (!(d.weights->array() > 0).all()) {
      throw ConfigError("design.weights", "entries must be strictly positive");
    }
  }
  if (const json* p = find(j, "P_l_f")) {
    d.P_l_f = matrix_from_json(*p, "design.P_l_f");
    require_shape(*d.P_l_f, sys.nx(), sys.nx(), "design.P_l_f");
    require_symmetric(*d.P_l_f, "design.P_l_f");
    if (!linalg::chol_psd(*d.P_l_f)) {
      throw ConfigError("design.P_l_f", "matrix is not positive definite");
    }
  }
  if (!d.alpha && !d.P_l_f) {
    throw ConfigError("design", "one of 'alpha' or 'P_l_f' is required");
  }
  return d;
}

SimulateParams parse_simulate(const json& j, const LinearSystem& sys) {
  require_object(j, "simulate");
  SimulateParams s;
  s.steps = positive_integer(require_key(j, "steps", "simulate"), "simulate.steps");
  s.trials = positive_integer(require_key(j, "trials", "simulate"), "simulate.trials");
  s.seed = seed_value(require_key(j, "seed", "simulate"), "simulate.seed");
  if (const json* m = find(j, "x0_mean")) {
    s.x0_mean = vector_from_json(*m, "simulate.x0_mean");
    if (s.x0_mean->size() != sys.nx()) {
      throw ConfigError("simulate.x0_mean", "expected " + std::to_string(sys.nx()) + " entries");
    }
  }
  if (const json* p = find(j, "x0_cov")) {
    s.x0_cov = matrix_from_json(*p, "simulate.x0_cov");
    require_shape(*s.x0_cov, sys.nx(), sys.nx(), "simulate.x0_cov");
    require_symmetric(*s.x0_cov, "simulate.x0_cov");
    if (!linalg::chol_psd(*s.x0_cov, 1e-10)) {
      throw ConfigError("simulate.x0_cov", "matrix is not positive semidefinite");
    }
  }
  return s;
}

// splitmix64 of (seed, counter); one independent 64-bit word per counter.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  // (0, 1), never exactly 0.
  return (static_cast<double>(counter_hash(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

// Box–Muller on two counter-indexed uniforms.
double counter_normal(std::uint64_t seed, std::uint64_t index) {
  const double u1 = counter_uniform(seed, 2 * index);
  const double u2 = counter_uniform(seed, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

LinearSystem generate_system(const GeneratorSpec& spec) {
  if (spec.n < 1) throw InvalidArgument("generate: n must be positive");
  if (!(spec.rho > 0 && spec.rho < 1)) throw InvalidArgument("generate: rho must lie in (0, 1)");
  const Eigen::Index n = spec.n;
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g(i, j) = counter_normal(spec.seed, static_cast<std::uint64_t>(i * n + j));
    }
  }
  const Matrix a = spec.rho * g / linalg::max_singular_value(g);
  const Matrix i = Matrix::Identity(n, n);
  return LinearSystem(a, i, 2.0 * i, i);
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  require_object(root, "<document>");

  const json* sys_j = find(root, "system");
  const json* gen_j = find(root, "generate");
  if ((sys_j == nullptr) == (gen_j == nullptr)) {
    throw ConfigError("<document>", "exactly one of 'system' or 'generate' is required");
  }

  std::optional<GeneratorSpec> generator;
  std::optional<LinearSystem> sys;
  if (sys_j != nullptr) {
    sys = parse_system(*sys_j);
  } else {
    generator = parse_generator(*gen_j);
    sys = generate_system(*generator);
  }

  RunConfig cfg{*sys, generator, std::nullopt, std::nullopt, {}, 1e-3, std::nullopt, "out"};

  if (const json* d = find(root, "design")) cfg.design = parse_design(*d, cfg.system);

  if (const json* an = find(root, "actual_noise")) {
    require_object(*an, "actual_noise");
    if (const json* ra = find(*an, "R_a_diag")) {
      cfg.R_a_diag = vector_from_json(*ra, "actual_noise.R_a_diag");
      if (cfg.R_a_diag->size() != cfg.system.ny()) {
        throw ConfigError("actual_noise.R_a_diag",
                          "expected " + std::to_string(cfg.system.ny()) + " entries");
      }
      if ((cfg.R_a_diag->array() < 0).any()) {
        throw ConfigError("actual_noise.R_a_diag", "entries must be non-negative");
      }
    }
  }

  if (const json* s = find(root, "solver")) {
    require_object(*s, "solver");
    if (const json* t = find(*s, "rel_tol")) {
      cfg.solver.rel_tol = number(*t, "solver.rel_tol");
      if (!(cfg.solver.rel_tol > 0)) throw ConfigError("solver.rel_tol", "must be positive");
    }
    if (const json* m = find(*s, "max_iters")) {
      cfg.solver.max_iters = positive_integer(*m, "solver.max_iters");
    }
    if (const json* c = find(*s, "divergence_cap")) {
      cfg.solver.divergence_cap = number(*c, "solver.divergence_cap");
      if (!(cfg.solver.divergence_cap > 0)) {
        throw ConfigError("solver.divergence_cap", "must be positive");
      }
    }
  }

  if (const json* r = find(root, "refine")) {
    require_object(*r, "refine");
    if (const json* res = find(*r, "resolution")) {
      cfg.refine_resolution = number(*res, "refine.resolution");
      if (!(cfg.refine_resolution > 0 && cfg.refine_resolution < 1)) {
        throw ConfigError("refine.resolution", "must lie in (0, 1)");
      }
    }
  }

  if (const json* s = find(root, "simulate")) cfg.simulate = parse_simulate(*s, cfg.system);

  if (const json* o = find(root, "output")) {
    require_object(*o, "output");
    if (const json* dir = find(*o, "dir")) {
      if (!dir->is_string()) throw ConfigError("output.dir", "expected a string");
      cfg.output_dir = dir->get<std::string>();
    }
  }
  return cfg;
}

}  // namespace kfbound::cli
