#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace asrh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 2;  // some entries errored, or nothing selected
inline constexpr int kExitAborted = 3;
inline constexpr int kExitUsage = 64;

/// Entry point for the `asrh` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace asrh::cli
