#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trajcc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kInternalError = 3;

// Runs one subcommand. `args` excludes the program name. The one-line summary goes to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trajcc::cli
