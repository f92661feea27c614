#include "kfbound/cli/pipeline.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "json_io.hpp"
#include "kfbound/bounds.hpp"
#include "kfbound/design.hpp"
#include "kfbound/kalman.hpp"

namespace kfbound::cli {

namespace {

namespace fs = std::filesystem;

constexpr std::array<std::pair<std::string_view, Command>, 7> kCommands{{
    {"validate", Command::Validate},
    {"envelope", Command::Envelope},
    {"design", Command::Design},
    {"verify", Command::Verify},
    {"refine", Command::Refine},
    {"simulate", Command::Simulate},
    {"report", Command::Report},
}};

json eigenvalues_json(const Matrix& m) { return vector_to_json(linalg::sym_eig(m).eigenvalues); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Lazily evaluated stages of the noise-design chain for one configuration.
class Run {
 public:
  Run(const RunConfig& cfg, fs::path out_dir, std::ostream& out)
      : cfg_(cfg), dir_(std::move(out_dir)), out_(out) {
    record_["system"] = {{"A", matrix_to_json(cfg_.system.A())},
                         {"B", matrix_to_json(cfg_.system.B())},
                         {"C", matrix_to_json(cfg_.system.C())},
                         {"Q", matrix_to_json(cfg_.system.Q())}};
    record_["solver"] = {{"rel_tol", cfg_.solver.rel_tol},
                         {"max_iters", cfg_.solver.max_iters},
                         {"divergence_cap", cfg_.solver.divergence_cap}};
    record_["refine"] = {{"resolution", cfg_.refine_resolution}};
    if (cfg_.generator) {
      record_["source"]["generate"] = {{"n", cfg_.generator->n},
                                       {"rho", cfg_.generator->rho},
                                       {"seed", cfg_.generator->seed}};
    }
  }

  json& record() { return record_; }
  json& diagnostics() { return diagnostics_; }
  std::string& stage() { return stage_; }

  const ValidationReport& validation() {
    if (!validation_) {
      stage_ = "validate";
      validation_ = validate_system(cfg_.system);
      json warnings = json::array();
      for (const auto& w : validation_->warnings) warnings.push_back(w);
      record_["validation"] = {{"spectral_radius_A", validation_->spectral_radius_A},
                               {"a_stable", validation_->a_stable},
                               {"a_invertible", validation_->a_invertible},
                               {"observable", validation_->observable},
                               {"controllable", validation_->controllable},
                               {"warnings", warnings}};
    }
    return *validation_;
  }

  const CovarianceEnvelope& env() {
    if (!envelope_) {
      stage_ = "envelope";
      envelope_ = envelope(cfg_.system, cfg_.solver);
      record_["envelope"] = {{"P_lb", matrix_to_json(envelope_->P_lb)},
                             {"P_ub", matrix_to_json(envelope_->P_ub)},
                             {"eig_P_lb", eigenvalues_json(envelope_->P_lb)},
                             {"eig_P_ub", eigenvalues_json(envelope_->P_ub)}};
    }
    return *envelope_;
  }

  const DesignParams& design_params() {
    if (!cfg_.design) {
      stage_ = "config";
      throw ConfigError("design", "this command needs a 'design' section");
    }
    return *cfg_.design;
  }

  const Matrix& bound() {
    if (!bound_) {
      const auto& d = design_params();
      if (d.P_l_f) {
        bound_ = *d.P_l_f;
      } else {
        const auto& e = env();
        stage_ = "prescribe";
        bound_ = prescribe_bound(e, *d.alpha);
        record_["prescription"] = {{"alpha", *d.alpha}};
      }
      const Vector weights =
          d.weights ? *d.weights : Vector::Ones(cfg_.system.ny()).eval();
      // Echoed in config form so the record can be fed back in.
      record_["design"] = {{"lambda_u_f", d.lambda_u_f},
                           {"weights", vector_to_json(weights)},
                           {"P_l_f", matrix_to_json(*bound_)}};
      record_["eig_P_l_f"] = eigenvalues_json(*bound_);
    }
    return *bound_;
  }

  const DesignSolution& solution() {
    if (!solution_) {
      const auto& d = design_params();
      const Matrix& p_l_f = bound();
      if (!validation().a_invertible) {
        stage_ = "certificate";
        throw Infeasible("A is numerically singular; the certificate needs an invertible A");
      }
      stage_ = "certificate";
      const auto cert = theorem2_certificate(cfg_.system, p_l_f, d.lambda_u_f);
      record_["certificate"] = {{"phi_prime", cert.phi_prime},
                                {"P_l0_prime", matrix_to_json(cert.P_l0_prime)},
                                {"eig_P_l0_prime", eigenvalues_json(cert.P_l0_prime)},
                                {"T1", matrix_to_json(cert.T1)},
                                {"eig_T1", eigenvalues_json(cert.T1)},
                                {"lambda_u_f", cert.lambda_u_f},
                                {"floor", 1.0 / cert.lambda_u_f}};

      stage_ = "feasibility";
      const double ell = 1.0 / d.lambda_u_f;
      const auto feas = check_feasibility(cert, cfg_.system.C(), ell);
      if (!feas.feasible()) {
        diagnostics_["T1_min_eig"] = feas.t1_min_eig;
        diagnostics_["T1_not_pd"] = true;
        throw Infeasible(feas.reason);
      }

      stage_ = "design";
      DesignProblem prob{cfg_.system, p_l_f, d.lambda_u_f,
                         d.weights ? *d.weights : Vector::Ones(cfg_.system.ny()).eval()};
      solution_ = solve_min_weighted_l1(prob, cert);
      const auto& s = *solution_;
      record_["solution"] = {{"lambda", vector_to_json(s.lambda)},
                             {"S_diag", vector_to_json(s.S_diag)},
                             {"cost", s.cost},
                             {"barrier_iterations", s.barrier_iterations},
                             {"kkt_gap", s.kkt_gap},
                             {"lmi_min_eig", s.lmi_min_eig},
                             {"floor_slack", s.lambda.minCoeff() - ell},
                             {"start_lambda", (*feas.start)(0)}};
    }
    return *solution_;
  }

  const VerificationReport& verification() {
    if (!verification_) {
      const auto& s = solution();
      stage_ = "verify";
      verification_ = verify_bound(cfg_.system, s.lambda, bound(), 1e-8, cfg_.solver);
      record_["verification"] = {{"P_star", matrix_to_json(verification_->P_star)},
                                 {"eig_P_star", eigenvalues_json(verification_->P_star)},
                                 {"min_eig_gap", verification_->min_eig_gap},
                                 {"satisfied", verification_->satisfied},
                                 {"tol", 1e-8}};
    }
    return *verification_;
  }

  const ShrinkResult& shrink() {
    if (!shrink_) {
      const auto& v = verification();
      if (!v.satisfied) {
        stage_ = "refine";
        throw NumericalFailure("designed R fails DARE verification (min eigenvalue gap " +
                               std::to_string(v.min_eig_gap) + "); refusing to refine");
      }
      stage_ = "refine";
      ShrinkOptions opts;
      opts.resolution = cfg_.refine_resolution;
      opts.solver = cfg_.solver;
      shrink_ = refine_shrink(cfg_.system, solution().lambda, bound(), opts);
      const double ell = 1.0 / design_params().lambda_u_f;
      const auto refined = verify_bound(cfg_.system, shrink_->lambda, bound(), 1e-8, cfg_.solver);
      json warnings = json::array();
      for (const auto& w : shrink_->warnings) warnings.push_back(w);
      record_["shrink"] = {{"gamma_star", shrink_->gamma},
                           {"lambda_refined", vector_to_json(shrink_->lambda)},
                           {"cost_refined", design_problem_weights().dot(shrink_->lambda)},
                           {"min_eig_gap_refined", refined.min_eig_gap},
                           {"violates_floor", shrink_->lambda.minCoeff() < ell},
                           {"at_floor", shrink_->at_floor},
                           {"warnings", warnings}};
    }
    return *shrink_;
  }

  void synthetic() {
    if (!cfg_.R_a_diag) return;
    const auto& s = solution();
    stage_ = "synthetic";
    json entry = {{"R_a_diag", vector_to_json(*cfg_.R_a_diag)}};
    try {
      entry["R_s_diag"] = vector_to_json(split_synthetic(s.lambda, *cfg_.R_a_diag));
    } catch (const InvalidArgument& e) {
      entry["error"] = e.what();
    }
    record_["synthetic"] = entry;
  }

  SimulationReport simulation() {
    if (!cfg_.simulate) {
      stage_ = "config";
      throw ConfigError("simulate", "this command needs a 'simulate' section");
    }
    const auto& s = solution();
    stage_ = "simulate";
    const auto& sp = *cfg_.simulate;
    SimulationConfig sc;
    sc.steps = sp.steps;
    sc.trials = sp.trials;
    sc.master_seed = sp.seed;
    sc.x0_mean = sp.x0_mean ? *sp.x0_mean : Vector::Zero(cfg_.system.nx()).eval();
    sc.x0_cov = sp.x0_cov ? *sp.x0_cov : Matrix::Identity(cfg_.system.nx(), cfg_.system.nx()).eval();
    auto rep = simulate(cfg_.system, s.lambda.asDiagonal().toDenseMatrix(), sc, cfg_.solver);
    record_["simulation"] = {{"steps", rep.steps},
                             {"trials", rep.trials},
                             {"seed", sp.seed},
                             {"empirical_cov", matrix_to_json(rep.empirical_cov)},
                             {"empirical_mean", vector_to_json(rep.empirical_mean)},
                             {"final_prior_cov", matrix_to_json(rep.prior_trajectory.back())},
                             {"dare_limit", matrix_to_json(rep.dare_limit)},
                             {"rel_error", rep.rel_error}};
    return rep;
  }

  void write_lambda_csv() {
    const auto& s = solution();
    std::string csv = "sensor_index,lambda\n";
    for (Eigen::Index i = 0; i < s.lambda.size(); ++i) {
      csv += std::to_string(i + 1) + "," + format_double(s.lambda(i)) + "\n";
    }
    write_text(dir_ / "lambda.csv", csv);
    out_ << "wrote " << (dir_ / "lambda.csv").string() << "\n";
  }

  void write_file(const char* name, const json& j) {
    write_json(dir_ / name, j);
    out_ << "wrote " << (dir_ / name).string() << "\n";
  }

  const fs::path& dir() const { return dir_; }

 private:
  Vector design_problem_weights() {
    const auto& d = design_params();
    return d.weights ? *d.weights : Vector::Ones(cfg_.system.ny()).eval();
  }

  const RunConfig& cfg_;
  fs::path dir_;
  std::ostream& out_;
  json record_ = json::object();
  json diagnostics_ = json::object();
  std::string stage_ = "start";

  std::optional<ValidationReport> validation_;
  std::optional<CovarianceEnvelope> envelope_;
  std::optional<Matrix> bound_;
  std::optional<DesignSolution> solution_;
  std::optional<VerificationReport> verification_;
  std::optional<ShrinkResult> shrink_;
};

json subset(const json& record, std::initializer_list<const char*> keys) {
  json out = json::object();
  for (const char* k : keys) {
    if (record.contains(k)) out[k] = record[k];
  }
  return out;
}

void execute(Command cmd, Run& run, const RunConfig& cfg, std::ostream& out) {
  auto& rec = run.record();
  switch (cmd) {
    case Command::Validate: {
      run.validation();
      out << rec["validation"].dump(2) << "\n";
      return;
    }
    case Command::Envelope: {
      run.env();
      if (cfg.design) run.bound();
      run.write_file("envelope.json", subset(rec, {"system", "envelope", "design", "prescription",
                                                   "eig_P_l_f"}));
      return;
    }
    case Command::Design: {
      run.solution();
      run.synthetic();
      run.write_lambda_csv();
      run.write_file("report.json", rec);
      return;
    }
    case Command::Verify: {
      run.verification();
      run.write_lambda_csv();
      run.write_file("verify.json", rec["verification"]);
      run.write_file("report.json", rec);
      return;
    }
    case Command::Refine: {
      run.shrink();
      run.write_lambda_csv();
      run.write_file("refine.json", rec["shrink"]);
      run.write_file("report.json", rec);
      return;
    }
    case Command::Simulate: {
      run.simulation();
      run.write_file("simulate.json", rec["simulation"]);
      run.write_file("report.json", rec);
      return;
    }
    case Command::Report: {
      const auto t0 = std::chrono::steady_clock::now();
      if (run.validation().a_stable) {
        run.env();
        run.write_file("envelope.json", subset(rec, {"system", "envelope"}));
      }
      run.solution();
      run.synthetic();
      run.write_lambda_csv();
      run.verification();
      run.write_file("verify.json", rec["verification"]);
      run.shrink();
      run.write_file("refine.json", rec["shrink"]);
      if (cfg.simulate) {
        run.simulation();
        run.write_file("simulate.json", rec["simulation"]);
      }
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      rec["elapsed_seconds"] = dt.count();
      run.write_file("report.json", rec);
      return;
    }
  }
}

int fail(Run* run, const fs::path* dir, int code, std::string_view status,
         const std::string& message, std::ostream& err) {
  json diag = {{"status", status}, {"exit_code", code}, {"message", message}};
  if (run != nullptr) {
    diag["stage"] = run->stage();
    for (auto& [k, v] : run->diagnostics().items()) diag[k] = v;
  }
  err << diag.dump() << "\n";
  if (dir != nullptr) {
    try {
      write_json(*dir / "diagnostics.json", diag);
    } catch (const Error&) {
      // The stderr line is the fallback channel.
    }
  }
  return code;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [n, c] : kCommands) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::string_view command_name(Command cmd) {
  for (const auto& [n, c] : kCommands) {
    if (c == cmd) return n;
  }
  return "?";
}

int run_command(Command cmd, const RunConfig& cfg, const fs::path& out_dir, std::ostream& out,
                std::ostream& err) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    return fail(nullptr, nullptr, kExitInvalidConfig, "invalid_config",
                "cannot create output directory " + out_dir.string() + ": " + ec.message(), err);
  }
  Run run(cfg, out_dir, out);
  try {
    execute(cmd, run, cfg, out);
    return kExitOk;
  } catch (const Infeasible& e) {
    return fail(&run, &out_dir, kExitInfeasible, "infeasible", e.what(), err);
  } catch (const InvalidArgument& e) {
    return fail(&run, &out_dir, kExitInvalidConfig, "invalid_config", e.what(), err);
  } catch (const NumericalFailure& e) {
    return fail(&run, &out_dir, kExitNumericalFailure, "numerical_failure", e.what(), err);
  } catch (const Error& e) {
    return fail(&run, &out_dir, kExitNumericalFailure, "error", e.what(), err);
  }
}

int run_from_file(Command cmd, const fs::path& config_path,
                  const std::optional<fs::path>& out_override, std::ostream& out,
                  std::ostream& err) {
  std::ifstream f(config_path, std::ios::binary);
  if (!f) {
    return fail(nullptr, nullptr, kExitInvalidConfig, "invalid_config",
                "cannot read config file " + config_path.string(), err);
  }
  std::stringstream buf;
  buf << f.rdbuf();

  std::optional<RunConfig> cfg;
  try {
    cfg = parse_config(buf.str());
  } catch (const InvalidArgument& e) {
    return fail(nullptr, nullptr, kExitInvalidConfig, "invalid_config", e.what(), err);
  } catch (const Error& e) {
    return fail(nullptr, nullptr, kExitNumericalFailure, "numerical_failure", e.what(), err);
  }

  fs::path dir = cfg->output_dir;
  if (const char* env = std::getenv("KFBOUND_OUT_DIR"); env != nullptr && *env != '\0') dir = env;
  if (out_override) dir = *out_override;
  return run_command(cmd, *cfg, dir, out, err);
}

}  // namespace kfbound::cli
