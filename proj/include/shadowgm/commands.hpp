#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shadowgm/config.hpp"

namespace shadowgm {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitBreakdown = 2, kExitViolated = 3 };

struct CommandResult {
  int exit_code = kExitOk;
  std::string summary;  // printed on stdout
  std::vector<std::filesystem::path> files;
};

/// Exit code for a library error.
int exit_code_for(const Error& e);

/// Machine-readable error line for stderr.
std::string error_json(const std::string& kind, const std::string& message);

CommandResult cmd_validate(const RunConfig& cfg);
CommandResult cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_ensemble(const RunConfig& cfg, const std::filesystem::path& out);
/// `inputs` is an optional JSON file of realized quantities; see README.
CommandResult cmd_bounds(const RunConfig& cfg, const std::optional<std::filesystem::path>& inputs,
                         const std::filesystem::path& out);
CommandResult cmd_verify_profile(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_tail_check(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_sweep_gamma(const RunConfig& cfg, const std::filesystem::path& out);
/// Re-hashes the embedded configuration of every output file under `dir`.
CommandResult cmd_verify(const std::filesystem::path& dir);

}  // namespace shadowgm
