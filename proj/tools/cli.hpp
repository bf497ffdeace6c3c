#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lpae::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDataError = 3, kNumericError = 4 };

/// Parses and runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lpae::cli
