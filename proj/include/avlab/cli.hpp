#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime or numeric
// failure (or a negative check result), 2 usage or configuration error.

#include <string>
#include <vector>

namespace avlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace avlab
