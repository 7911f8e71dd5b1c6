#pragma once

#include <iosfwd>

namespace osc {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitStable = 0,
  kExitUnstable = 1,
  kExitConfigError = 2,
  kExitDiverged = 3,
};

/// Entry point behind the `osc` executable; writes to `out`/`err` instead of
/// the process streams so it can be driven from tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace osc
