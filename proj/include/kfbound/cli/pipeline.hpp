#ifndef KFBOUND_CLI_PIPELINE_HPP
#define KFBOUND_CLI_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <ostream>
#include <string_view>

#include "kfbound/cli/config.hpp"

namespace kfbound::cli {

enum class Command { Validate, Envelope, Design, Verify, Refine, Simulate, Report };

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitNumericalFailure = 4;

std::optional<Command> parse_command(std::string_view name);
std::string_view command_name(Command cmd);

/// Run one command against a parsed configuration, writing its files under
/// out_dir. Human-readable progress goes to `out`; a machine-readable JSON
/// diagnostic line goes to `err` on failure (and diagnostics.json is written).
/// Returns the process exit status.
int run_command(Command cmd, const RunConfig& cfg, const std::filesystem::path& out_dir,
                std::ostream& out, std::ostream& err);

/// Read, parse and run; config errors map to exit status 2.
int run_from_file(Command cmd, const std::filesystem::path& config_path,
                  const std::optional<std::filesystem::path>& out_override, std::ostream& out,
                  std::ostream& err);

}  // namespace kfbound::cli

#endif  // KFBOUND_CLI_PIPELINE_HPP
