#pragma once

#include <string>
#include <vector>

namespace lcmdp::cli {

// Exit codes: 0 success (LP optimal where one is solved), 2 infeasible
// synthesis problem, 1 any other error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace lcmdp::cli
