#pragma once

#include <string>
#include <vector>

namespace fairwasp {

// Whole CLI as a function so tests can drive it in-process.
// Exit codes: 0 success/converged, 1 validation or I/O error, 2 infeasible,
// 3 numerical failure, 4 iteration limit.
int run_cli(const std::vector<std::string>& args);

}  // namespace fairwasp
