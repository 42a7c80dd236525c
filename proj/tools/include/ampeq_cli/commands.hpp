#pragma once

#include <filesystem>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "ampeq/error.hpp"
#include "ampeq_cli/config.hpp"

namespace ampeq::cli {

enum class Command { Derive, Simulate, Compare, Stability, Report };

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

/// Maps a library error to the process exit code.
int exit_code_for(ErrorCode code);

/// Amplitude-equation document written by `derive`.
nlohmann::json derive_document(const RunConfig& config);

/// Loads the config, runs the command and writes artifacts plus manifest.json
/// under <output.dir>/<command>/. Diagnostics go to `err`.
int run_command(Command command, const std::filesystem::path& config_path, std::ostream& err);

std::string command_name(Command command);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace ampeq::cli
