#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asrh/clock.hpp"
#include "asrh/error.hpp"
#include "asrh/metrics.hpp"

namespace asrh::plan {

enum class DurationClass { Short, Medium, Long, Any };

std::string_view to_string(DurationClass d) noexcept;
std::optional<DurationClass> parse_duration_class(std::string_view s) noexcept;

/// True for a well-formed BCP-47 tag: alphabetic primary subtag of 2-8
/// letters followed by alphanumeric subtags of 1-8 characters.
bool is_language_tag(std::string_view tag) noexcept;

/// Unrecognised JSON members of an object, kept so that a plan written by a
/// newer tool survives a parse/serialize cycle unchanged.
using Extra = nlohmann::json;

struct PlanFilters {
  std::string category_id;
  std::string language = "en";
  std::uint32_t max_results = 1;
  DurationClass duration_class = DurationClass::Any;
  std::optional<std::string> region;
  Extra extra = Extra::object();

  friend bool operator==(const PlanFilters&, const PlanFilters&) = default;
};

struct CaptionTrackInfo {
  std::string language;
  bool is_auto_generated = false;
  Extra extra = Extra::object();

  friend bool operator==(const CaptionTrackInfo&, const CaptionTrackInfo&) = default;
};

enum class FlagKind { LikelySeo, LikelyDescriptive, HighWer, EmptyReference, Normal };

std::string_view to_string(FlagKind k) noexcept;
std::optional<FlagKind> parse_flag_kind(std::string_view s) noexcept;

struct DiscrepancyFlag {
  FlagKind kind = FlagKind::Normal;
  double score = 0.0;  // [0, 1]
  std::string evidence;

  friend bool operator==(const DiscrepancyFlag&, const DiscrepancyFlag&) = default;
};

struct OutcomeError {
  ErrorCode code = ErrorCode::EngineFailure;
  std::string message;

  friend bool operator==(const OutcomeError&, const OutcomeError&) = default;
};

/// Result of testing one video with one engine. Exactly one of `wer` and
/// `error` is set.
struct TestOutcome {
  std::optional<metrics::WerScore> wer;
  std::optional<metrics::AlignmentCounts> counts;
  std::string engine_label;
  std::uint64_t normalized_ref_words = 0;
  std::int64_t runtime_ms = 0;
  std::optional<OutcomeError> error;
  std::vector<DiscrepancyFlag> audit_flags;
  std::string reference_rules_version;
  std::string hypothesis_rules_version;
  std::vector<std::string> warnings;
  Extra extra = Extra::object();

  bool scored() const noexcept { return wer.has_value(); }

  friend bool operator==(const TestOutcome&, const TestOutcome&) = default;
};

struct VideoEntry {
  std::string video_id;
  std::string title;
  std::string category_id;
  std::string category_name;
  std::uint64_t duration_seconds = 0;
  CaptionTrackInfo caption_track;
  std::optional<TestOutcome> outcome;
  Extra extra = Extra::object();

  friend bool operator==(const VideoEntry&, const VideoEntry&) = default;
};

struct TestPlan {
  std::string plan_id;
  std::string created_at;  // RFC 3339
  std::vector<PlanFilters> filters;
  std::optional<std::string> continuation_token;  // opaque, never interpreted here
  std::vector<VideoEntry> videos;
  std::optional<std::string> engine_label;
  Extra extra = Extra::object();

  friend bool operator==(const TestPlan&, const TestPlan&) = default;
};

/// New plan with a fresh id and timestamp from `clock`.
/// Throws Error{EmptyPlan}, Error{DuplicateVideo} or Error{InvariantViolation}.
TestPlan build_plan(std::vector<PlanFilters> filters, std::vector<VideoEntry> entries,
                    std::optional<std::string> token, Clock& clock);

/// Throws Error{SchemaViolation} for structural problems and
/// Error{InvariantViolation} for semantic ones. A plan without videos parses
/// (it cannot be run).
TestPlan parse_plan(std::string_view document);

/// Sorted keys, two-space indent, UTF-8, trailing newline.
std::string serialize_plan(const TestPlan& plan);

/// Checks every invariant parse_plan checks, on an in-memory plan.
void validate_plan(const TestPlan& plan);

}  // namespace asrh::plan
