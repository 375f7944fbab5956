#pragma once

#include <string>
#include <vector>

namespace fracneu {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitSolver = 2,
  kExitPartialSweep = 3,
};

/// Runs the front end; args[0] is the program name.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace fracneu
