#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sspop::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kAssertionFailure = 1, kUsageError = 2 };

/// Runs one command; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sspop::cli
