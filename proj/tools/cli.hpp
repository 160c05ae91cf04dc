#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dimfuse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs the tool with `args` (without the program name). Normal output goes
/// to `out`, help and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dimfuse::cli
