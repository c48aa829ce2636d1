#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trajprune::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Parses argv and dispatches to a subcommand. Returns the process exit code:
/// 0 success, 2 usage or validation failure, 3 runtime failure.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Convenience for in-process callers; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trajprune::cli
