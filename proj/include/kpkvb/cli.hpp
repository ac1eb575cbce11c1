#pragma once

#include <iosfwd>

namespace kpkvb {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolations = 1,  ///< verify found violations, or an experiment criterion failed
  kExitUsage = 2,       ///< bad flags, invalid config, N <= nu, --seeds 0
  kExitRuntime = 3,     ///< unreadable or malformed input, I/O failure
};

/// Entry point of the `kpkvb` tool; argv[0] is the program name. Data goes to
/// `out` (or to files), resolved parameters and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kpkvb
