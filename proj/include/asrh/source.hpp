#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asrh/testplan.hpp"

namespace asrh::source {

struct CaptionSegment {
  double start_seconds = 0.0;
  double duration_seconds = 0.0;
  std::string text;

  friend bool operator==(const CaptionSegment&, const CaptionSegment&) = default;
};

/// One language's timed subtitles. Segments are ordered by start time.
struct CaptionTrack {
  std::string video_id;
  std::string language;
  bool is_auto_generated = false;
  std::vector<CaptionSegment> segments;
};

struct AudioAsset {
  std::string video_id;
  std::filesystem::path file_path;
  std::string format;                     // file extension, e.g. "wav", "m4a"
  std::optional<double> duration_seconds; // known for WAV files only
  std::string checksum;                   // SHA-256 of the file
};

struct SearchPage {
  std::vector<plan::VideoEntry> entries;
  std::optional<std::string> next_token;
};

struct CaptionPolicy {
  bool allow_auto_generated = false;
};

/// Everything the harness needs from a video platform. Implementations are
/// safe to share across threads.
class VideoSource {
 public:
  virtual ~VideoSource() = default;

  /// At most filters.max_results entries, each with a usable caption track
  /// in filters.language. Throws Error{NoMatches} when nothing qualifies.
  virtual SearchPage search_videos(const plan::PlanFilters& filters, const std::optional<std::string>& token) = 0;

  /// Throws NoCaptions, OnlyAutoGenerated, LanguageUnavailable or NetworkError.
  virtual CaptionTrack fetch_captions(const std::string& video_id, const std::string& language) = 0;

  /// Places the audio in `workdir`, reusing a cached copy when its checksum
  /// still matches. Throws DownloaderMissing, DownloadFailed or DiskFull.
  virtual AudioAsset acquire_audio(const std::string& video_id, const std::filesystem::path& workdir) = 0;
};

/// Segment texts joined with single spaces; text inside segments is untouched.
std::string flatten_transcript(const CaptionTrack& track);

/// Stable-sorts segments by start time.
void sort_segments(CaptionTrack& track);

/// Exact tag match (case-insensitive) or equal primary subtags.
bool language_matches(std::string_view track_language, std::string_view wanted);

/// Chooses the best track for `language` under `policy` from the candidates,
/// or throws the appropriate caption error.
const CaptionTrack& select_track(const std::vector<CaptionTrack>& tracks, const std::string& video_id,
                                 const std::string& language, const CaptionPolicy& policy);

struct Category {
  std::string_view id;
  std::string_view name;
};

/// The platform's standard video categories.
std::span<const Category> platform_categories();

/// Accepts a category name ("Pets & Animals", case-insensitive) or id ("15").
std::optional<std::string> category_id_for(std::string_view name_or_id);
std::optional<std::string> category_name_for(std::string_view id);

}  // namespace asrh::source
