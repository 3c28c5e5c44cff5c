#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dnagpt {

// Exit codes shared by every subcommand.
inline constexpr int kExitHuman = 0;
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMachine = 2;
inline constexpr int kExitUndecided = 3;

// Entry point of the command-line tool. args excludes the program name.
// Machine-readable output goes to `out`, diagnostics to `err`; `in` backs
// stdin input.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace dnagpt
