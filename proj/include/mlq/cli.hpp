#pragma once

#include <iosfwd>

namespace mlq {

/// Exit codes of the command-line driver.
enum ExitCode : int { exit_pass = 0, exit_test_failure = 1, exit_config_error = 2 };

/// Entry point for `mlq <simulate|decompose|sde|compare|selftest> [flags]`.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlq
