#pragma once

#include <iosfwd>

namespace polite {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `politeness` tool, testable without a process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polite
