// Command-line front end for the noise-covariance design pipeline.
//
//   kfbound <command> --config <path> [--out <dir>]
//
// Commands: validate, envelope, design, verify, refine, simulate, report.
// The output directory can also be set with KFBOUND_OUT_DIR; --out wins.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kfbound/cli/pipeline.hpp"

int main(int argc, char** argv) {
  namespace cli = kfbound::cli;

  CLI::App app{"Design measurement-noise covariances that lower-bound Kalman filter accuracy"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  app.add_option("command", command, "validate | envelope | design | verify | refine | "
                                     "simulate | report")
      ->required()
      ->check(CLI::IsMember(
          {"validate", "envelope", "design", "verify", "refine", "simulate", "report"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides config and KFBOUND_OUT_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitInvalidConfig;
  }

  const auto cmd = cli::parse_command(command);
  std::optional<std::filesystem::path> out;
  if (!out_dir.empty()) out = out_dir;
  return cli::run_from_file(*cmd, config_path, out, std::cout, std::cerr);
}
