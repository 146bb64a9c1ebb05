#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace strokegen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one command. `args` excludes the program name.
/// Returns 0 on success, 2 on usage/input errors, 3 on numeric failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace strokegen::cli
