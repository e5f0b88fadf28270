#ifndef SNS_COMMANDS_HPP
#define SNS_COMMANDS_HPP

#include "sns/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sns {

enum class Command { verify_identities, verify_moments, verify_mlh, asf_probe, simulate };

/// Exit-code contract of every command.
enum ExitCode : int { exit_pass = 0, exit_violation = 1, exit_hypothesis = 2, exit_runtime = 3 };

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

struct CommandOutput {
  int exit_code = exit_runtime;
  nlohmann::ordered_json report;     // deterministic given the config
  nlohmann::ordered_json constants;  // constants and hypothesis report
  std::vector<std::pair<std::string, std::string>> csv_files;  // file name, contents
};

/// Runs one command in memory. Never throws for hypothesis or runtime
/// failures; those are reported through the exit code and the report.
CommandOutput run_command(Command command, const ExperimentConfig& config);

/// Runs a command and writes report.json, constants.json, the CSV files and
/// meta.json (timestamps and thread count) into `out_dir`.
int execute_command(Command command, const ExperimentConfig& config,
                    const std::filesystem::path& out_dir);

}  // namespace sns

#endif  // SNS_COMMANDS_HPP
