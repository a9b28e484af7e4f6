#pragma once

#include <string>
#include <vector>

namespace voxdim::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // unrecoverable runtime error
inline constexpr int kUsage = 2;    // bad arguments or inputs that fail validation

/// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args);

}  // namespace voxdim::cli
