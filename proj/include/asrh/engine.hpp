#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "asrh/clock.hpp"
#include "asrh/source.hpp"

namespace asrh::engine {

enum class EngineKind { Subprocess, Http, Mock };

std::string_view to_string(EngineKind k) noexcept;
std::optional<EngineKind> parse_engine_kind(std::string_view s) noexcept;

/// How to reach one ASR engine.
///   subprocess: `<command...> <audio-path>`, transcript on stdout, exit 0
///   http:       POST audio bytes to the URL, response `{"text": "..."}`
///   mock:       path to a JSON object mapping video_id to a transcript
///               string or to `{"error": "..."}`
struct EngineSpec {
  std::string label;
  EngineKind kind = EngineKind::Mock;
  std::string endpoint_or_command;
  int timeout_seconds = 600;

  friend bool operator==(const EngineSpec&, const EngineSpec&) = default;
};

/// Throws Error{ConfigError} when the label is empty or timeout < 1.
void validate(const EngineSpec& spec);

inline constexpr std::string_view kEmptyOutputWarning = "EngineOutputEmptyWarning";

struct Hypothesis {
  std::string video_id;
  std::string text;  // raw engine output
  std::string engine_label;
  std::int64_t latency_ms = 0;
  std::vector<std::string> warnings;
};

class EngineRegistry {
 public:
  /// Throws Error{DuplicateLabel} or Error{ConfigError}.
  void register_engine(EngineSpec spec);

  /// Throws Error{ConfigError} for an unknown label or an empty registry.
  const EngineSpec& get(const std::string& label) const;

  std::vector<std::string> labels() const;
  bool empty() const noexcept { return specs_.empty(); }

  /// JSON array of EngineSpec objects. Mock map paths are resolved against
  /// `base_dir`.
  static EngineRegistry parse(std::string_view document, const std::filesystem::path& base_dir);
  static EngineRegistry load(const std::filesystem::path& file);

 private:
  std::map<std::string, EngineSpec> specs_;
};

/// Runs adapters with at most `concurrency` transcriptions in flight.
/// Engine calls are never retried.
class Transcriber {
 public:
  explicit Transcriber(Clock& clock, std::ptrdiff_t concurrency = 1);

  /// Throws Error{EngineTimeout} or Error{EngineFailure}. Empty output is
  /// returned with kEmptyOutputWarning attached.
  Hypothesis transcribe(const EngineSpec& spec, const source::AudioAsset& audio);

 private:
  std::string run_adapter(const EngineSpec& spec, const source::AudioAsset& audio);

  Clock& clock_;
  std::counting_semaphore<> slots_;
};

}  // namespace asrh::engine
