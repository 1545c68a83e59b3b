#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace superrad::cli {

enum ExitCode : int {
  kSuccess = 0,
  kIoOrParse = 1,
  kValidation = 2,
  kNumerical = 3,
};

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace superrad::cli
