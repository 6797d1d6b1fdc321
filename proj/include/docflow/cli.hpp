#pragma once

#include <iosfwd>

namespace docflow {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Entry point of the `docflow` tool, separated from main() for testing.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace docflow
