#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "asrh/audio.hpp"
#include "asrh/source.hpp"

namespace asrh::source {

struct YouTubeConfig {
  std::string api_key;
  std::string api_base = "https://www.googleapis.com/youtube/v3";
  std::string timedtext_base = "https://www.youtube.com/api/timedtext";
  std::string watch_url_prefix = "https://www.youtube.com/watch?v=";
  std::string downloader = "yt-dlp";
  std::ptrdiff_t download_concurrency = 4;
  std::chrono::milliseconds http_timeout{30000};
  CaptionPolicy captions;

  /// Reads ASRH_API_KEY, ASRH_DOWNLOADER, ASRH_API_BASE and ASRH_TIMEDTEXT_BASE.
  static YouTubeConfig from_environment();
};

/// Data API v3 for search and caption discovery, the timedtext endpoint for
/// caption bodies and an external downloader for audio.
class YouTubeSource final : public VideoSource {
 public:
  explicit YouTubeSource(YouTubeConfig config);

  SearchPage search_videos(const plan::PlanFilters& filters, const std::optional<std::string>& token) override;
  CaptionTrack fetch_captions(const std::string& video_id, const std::string& language) override;
  AudioAsset acquire_audio(const std::string& video_id, const std::filesystem::path& workdir) override;

 private:
  struct TrackInfo {
    std::string language;
    std::string name;
    bool is_auto_generated = false;
  };

  std::vector<TrackInfo> list_tracks(const std::string& video_id);

  YouTubeConfig config_;
  ExternalDownloader downloader_;
};

/// "PT1H2M3S" and friends; nullopt for anything else.
std::optional<std::uint64_t> parse_iso8601_duration(std::string_view s);

}  // namespace asrh::source
