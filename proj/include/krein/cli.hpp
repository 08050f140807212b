#pragma once

#include <iosfwd>

namespace krein {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitNoConvergence = 4;

/// Subcommands: interp-sweep, herbst, squire, dynamo, bounds, ep-locate.
/// Results go to --out (or `out`); diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace krein
