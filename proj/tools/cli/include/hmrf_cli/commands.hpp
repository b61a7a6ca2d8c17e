#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hmrf::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,          ///< unreadable, unwritable or malformed file
  kExitUsage = 2,       ///< bad flags or arguments
  kExitData = 3,        ///< capacity exceeded or degenerate data
  kExitNrDiverged = 4,  ///< estimation ran but Newton-Raphson diverged
};

/// Parses the command line and runs one subcommand. `argv[0]` is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hmrf::cli
