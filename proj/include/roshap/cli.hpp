#pragma once

#include <string>
#include <vector>

namespace roshap::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit code. Diagnostics go to stderr.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace roshap::cli
