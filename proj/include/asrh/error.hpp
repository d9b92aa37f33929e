#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asrh {

/// Every failure the harness can report. Names are stable: they appear in
/// results JSON (`outcome.error.code`) and in the database.
enum class ErrorCode {
  EmptyReference,
  MalformedRules,
  CyclicRules,
  DuplicateVideo,
  EmptyPlan,
  SchemaViolation,
  InvariantViolation,
  AuthError,
  QuotaExceeded,
  NetworkError,
  NoMatches,
  NoCaptions,
  OnlyAutoGenerated,
  LanguageUnavailable,
  DownloaderMissing,
  DownloadFailed,
  DiskFull,
  EngineTimeout,
  EngineFailure,
  DuplicateLabel,
  ConfigError,
  SinkUnavailable,
  StorageCorrupt,
  DuplicateKey,
  EmptySelection,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Inverse of to_string; returns false for unknown names.
bool parse_error_code(std::string_view name, ErrorCode& out) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace asrh
