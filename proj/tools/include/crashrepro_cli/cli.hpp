#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crashrepro::cli {

enum ExitCode : int { kOk = 0, kDomainFailure = 1, kUsage = 2, kEnvironment = 3 };

/// Runs the command line `args` (without the program name) and returns the
/// process exit status. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crashrepro::cli
