#pragma once

#include <string>

namespace facemt::testkit {

struct CommandResult {
  int exit_code = -1;
  std::string output;  ///< stdout and stderr, interleaved
};

/// Runs `command` through /bin/sh and captures its combined output.
CommandResult run_command(const std::string& command);

/// Single-quotes `s` for the shell.
std::string shell_quote(const std::string& s);

}  // namespace facemt::testkit
