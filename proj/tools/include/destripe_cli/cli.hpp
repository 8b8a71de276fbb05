#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace destripe::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeError = 1,
  kUsageError = 2,
};

/// Runs the command line `destripe <subcommand> ...`; args excludes the
/// program name. Reports go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace destripe::cli
