#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cadlag::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one subcommand (generate, check, metric, diagnose, converge). `args`
/// excludes the program name. Returns 0 on success, 1 when a verdict fails and
/// 2 on malformed input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cadlag::cli
