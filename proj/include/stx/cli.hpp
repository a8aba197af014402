#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stx::cli {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kOracleError = 4,
};

/// Runs the command line `args` (without the program name), writing the
/// primary output and diagnostics to the given streams unless --out
/// redirects the output to a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace stx::cli
