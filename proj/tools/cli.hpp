#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stabrb::cli {

enum ExitCode { kOk = 0, kUsage = 1, kInvalidConfig = 2, kSolverFailure = 3, kNoInfSup = 4 };

/// Runs one command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stabrb::cli
