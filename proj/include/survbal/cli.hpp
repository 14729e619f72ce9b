#pragma once

#include <string>
#include <vector>

namespace survbal {

// Command-line entry point. args exclude the program name. Exit codes:
// 0 success, 1 validation error, 2 runtime divergence, 3 bound violation.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace survbal
