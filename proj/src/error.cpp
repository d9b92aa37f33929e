#include "asrh/error.hpp"

#include <array>
#include <utility>

namespace asrh {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 25> kNames{{
    {ErrorCode::EmptyReference, "EmptyReference"},
    {ErrorCode::MalformedRules, "MalformedRules"},
    {ErrorCode::CyclicRules, "CyclicRules"},
    {ErrorCode::DuplicateVideo, "DuplicateVideo"},
    {ErrorCode::EmptyPlan, "EmptyPlan"},
    {ErrorCode::SchemaViolation, "SchemaViolation"},
    {ErrorCode::InvariantViolation, "InvariantViolation"},
    {ErrorCode::AuthError, "AuthError"},
    {ErrorCode::QuotaExceeded, "QuotaExceeded"},
    {ErrorCode::NetworkError, "NetworkError"},
    {ErrorCode::NoMatches, "NoMatches"},
    {ErrorCode::NoCaptions, "NoCaptions"},
    {ErrorCode::OnlyAutoGenerated, "OnlyAutoGenerated"},
    {ErrorCode::LanguageUnavailable, "LanguageUnavailable"},
    {ErrorCode::DownloaderMissing, "DownloaderMissing"},
    {ErrorCode::DownloadFailed, "DownloadFailed"},
    {ErrorCode::DiskFull, "DiskFull"},
    {ErrorCode::EngineTimeout, "EngineTimeout"},
    {ErrorCode::EngineFailure, "EngineFailure"},
    {ErrorCode::DuplicateLabel, "DuplicateLabel"},
    {ErrorCode::ConfigError, "ConfigError"},
    {ErrorCode::SinkUnavailable, "SinkUnavailable"},
    {ErrorCode::StorageCorrupt, "StorageCorrupt"},
    {ErrorCode::DuplicateKey, "DuplicateKey"},
    {ErrorCode::EmptySelection, "EmptySelection"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

bool parse_error_code(std::string_view name, ErrorCode& out) noexcept {
  for (const auto& [c, n] : kNames) {
    if (n == name) {
      out = c;
      return true;
    }
  }
  return false;
}

}  // namespace asrh
