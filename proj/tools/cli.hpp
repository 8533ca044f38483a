#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pd::cli {

/// Exit codes of `pd regress`; other commands use ok/failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRegression = 1;
inline constexpr int kExitUnknownBot = 2;
inline constexpr int kExitFailure = 3;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pd::cli
