#pragma once

#include <string>
#include <vector>

namespace perihelion::cli {

enum ExitCode : int { kOk = 0, kDomain = 2, kConvergence = 3, kVerification = 4 };

/// Runs the command line; argv[0] is the program name. Returns the exit code.
int run(const std::vector<std::string>& args);

}  // namespace perihelion::cli
