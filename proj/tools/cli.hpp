// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace atkse::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,     // runtime error or tolerance breach
  kUsage = 2,       // bad flags
  kInfeasible = 3,  // configuration cannot be executed
};

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atkse::cli
