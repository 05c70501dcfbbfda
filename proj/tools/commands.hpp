#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace edd::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNotConverged = 2,
  kRatioViolation = 3,
};

/// Runs one CLI invocation in-process. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edd::cli
