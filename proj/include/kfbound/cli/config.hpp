#ifndef KFBOUND_CLI_CONFIG_HPP
#define KFBOUND_CLI_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "kfbound/linalg.hpp"
#include "kfbound/model.hpp"
#include "kfbound/riccati.hpp"

namespace kfbound::cli {

/// Config rejected; `path` names the offending key, e.g. "system.Q".
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string path, const std::string& message)
      : InvalidArgument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Seeded random fixture: A = rho G / sigma_1(G) with G standard normal,
/// B = Q = I and C = 2I.
struct GeneratorSpec {
  int n = 0;
  double rho = 0;
  std::uint64_t seed = 0;
};

struct DesignParams {
  std::optional<double> alpha;
  double lambda_u_f = 0;
  std::optional<Vector> weights;
  /// Explicit bound; takes precedence over alpha.
  std::optional<Matrix> P_l_f;
};

struct SimulateParams {
  long steps = 0;
  long trials = 0;
  std::uint64_t seed = 0;
  std::optional<Vector> x0_mean;
  std::optional<Matrix> x0_cov;
};

struct RunConfig {
  LinearSystem system;
  std::optional<GeneratorSpec> generator;
  std::optional<DesignParams> design;
  std::optional<Vector> R_a_diag;
  SolverOptions solver;
  double refine_resolution = 1e-3;
  std::optional<SimulateParams> simulate;
  std::string output_dir = "out";
};

/// Parse and validate a JSON run configuration.
RunConfig parse_config(std::string_view text);

/// Materialize the seeded fixture.
LinearSystem generate_system(const GeneratorSpec& spec);

}  // namespace kfbound::cli

#endif  // KFBOUND_CLI_CONFIG_HPP
