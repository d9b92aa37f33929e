#pragma once

#include <filesystem>
#include <map>
#include <mutex>

#include "asrh/source.hpp"

namespace asrh::source {

/// Offline source backed by a directory tree:
///
///   <root>/<video_id>/meta.json      title, category_id, category_name,
///                                    duration_seconds, language, search_rank
///   <root>/<video_id>/captions.json  {"tracks": [{language, is_auto_generated,
///                                    segments: [{start, duration, text}]}]}
///   <root>/<video_id>/audio.<ext>    copied byte-for-byte into the cache
///
/// Search order is (search_rank, video_id). Continuation tokens look like
/// "offset:<n>".
class FixtureSource final : public VideoSource {
 public:
  explicit FixtureSource(std::filesystem::path root, CaptionPolicy policy = {});

  SearchPage search_videos(const plan::PlanFilters& filters, const std::optional<std::string>& token) override;
  CaptionTrack fetch_captions(const std::string& video_id, const std::string& language) override;
  AudioAsset acquire_audio(const std::string& video_id, const std::filesystem::path& workdir) override;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  struct Meta {
    plan::VideoEntry entry;
    std::string language;
    std::int64_t search_rank = 0;
  };

  const std::vector<Meta>& catalogue();
  std::vector<CaptionTrack> load_tracks(const std::string& video_id) const;

  std::filesystem::path root_;
  CaptionPolicy policy_;
  std::once_flag loaded_;
  std::vector<Meta> catalogue_;
};

}  // namespace asrh::source
