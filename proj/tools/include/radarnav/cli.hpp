#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace radarnav::cli {

/// Process exit codes. Stable contract for scripts.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,      // I/O or internal error
  kCollision = 2,
  kTimeout = 3,
  kUsage = 64,       // bad flags, missing scenario file, unknown stage
  kBadScenario = 65, // scenario file present but invalid
};

/// Runs `radarnav <args...>` in-process; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace radarnav::cli
