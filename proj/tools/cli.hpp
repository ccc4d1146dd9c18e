#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trasa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. Output goes to `out`, diagnostics to `err`.
/// Returns 0 on success, 2 on usage errors and 1 on any other error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trasa::cli
