#pragma once

#include <ostream>

namespace medres::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitDivergence = 4,
  kExitDigest = 5,
};

// Entry point of the `medres` tool: subcommands prepare, train, eval and
// score. Returns the process exit code instead of exiting.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace medres::cli
