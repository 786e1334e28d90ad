#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs `pas <args...>` (args excludes the program name). Returns 0 on
// success, 2 for usage or configuration errors, 1 for runtime failures.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pas::cli
