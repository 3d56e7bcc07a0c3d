// SPDX-License-Identifier: Apache-2.0
//
// Subcommand implementations behind the rangeperc executable. Exit codes:
// 0 success, 1 a check failed, 2 configuration or usage error.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rangeperc/config.hpp"
#include "rangeperc/verify.hpp"

namespace rangeperc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

struct CommandOptions {
  std::string command;
  std::optional<std::filesystem::path> config_path;
  std::vector<std::string> overrides;  // KEY=VALUE
  std::optional<std::string> seed_text;
  std::optional<std::string> mode;
  std::optional<unsigned> workers;
  std::filesystem::path out_dir = "rangeperc-out";
  bool check_equivalence = false;
};

const std::vector<std::string>& command_names();

/// Config keys accepted by a command (for --help output).
std::vector<KeySpec> command_schema(const std::string& command);

/// Resolves config and seed, runs the command, writes its CSV files and
/// manifest.json under out_dir, and reports on `out`/`err`.
int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Seed precedence: explicit text, then the `seed` config key, then the
/// RANGEPERC_SEED environment variable, then the built-in default.
std::string resolve_seed_text(const std::optional<std::string>& flag, const Config& config);

inline constexpr const char* kDefaultSeed = "0x5eed";

}  // namespace rangeperc
