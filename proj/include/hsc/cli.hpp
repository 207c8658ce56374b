#pragma once

#include <iosfwd>

namespace hsc {

// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

// Entry point of the `hsc` tool. Results go to `out` as key=value lines (or
// a JSON object with --json); diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hsc
