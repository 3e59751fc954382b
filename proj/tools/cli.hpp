#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rdmft::cli {

/// Exit codes: 0 success, 1 domain error (infeasible occupations, empty
/// sector, capacity), 2 usage or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Summaries go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdmft::cli
