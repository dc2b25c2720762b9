#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace carpet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one subcommand; args excludes the program name. Messages go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace carpet::cli
