#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asrh {

struct ProcessResult {
  int exit_code = -1;        // -1 when killed by a signal or on timeout
  bool timed_out = false;
  bool exec_failed = false;  // the program could not be started at all
  std::string out;
  std::string err;
};

/// Runs argv[0] (looked up on PATH) with stdin at /dev/null, capturing
/// stdout and stderr. On timeout the whole process group is killed.
ProcessResult run_process(const std::vector<std::string>& argv,
                          std::optional<std::chrono::milliseconds> timeout = std::nullopt);

/// PATH lookup; names containing '/' are checked as given.
std::optional<std::filesystem::path> find_executable(const std::string& name);

/// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(std::string_view command);

}  // namespace asrh
