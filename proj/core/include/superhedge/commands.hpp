#pragma once

#include <optional>
#include <string>

#include "superhedge/config.hpp"

namespace superhedge {

/// CLI exit codes: 0 ok, 2 config, 3 not hedgeable, 4 radius degenerate,
/// 5 internal.
enum ExitCode {
  kOk = 0,
  kConfigError = 2,
  kNotHedgeable = 3,
  kRadiusDegenerate = 4,
  kInternalError = 5,
};

int exit_code_for(const std::exception& e);

struct CommandOptions {
  std::string out_dir;           // empty = no CSV side files
  std::optional<int> threads;    // overrides the config value
  bool verbose = false;          // timing and progress on stderr
};

struct CommandResult {
  int exit_code = kOk;
  std::string json_text;  // result document (or {"error": ...})
};

CommandResult run_price(const RunConfig& config, const CommandOptions& options);
CommandResult run_check(const RunConfig& config, const CommandOptions& options);
CommandResult run_hedge(const RunConfig& config, const CommandOptions& options,
                        std::optional<double> initial_cash);
CommandResult run_converge(const RunConfig& config,
                           const CommandOptions& options, int levels);

}  // namespace superhedge
