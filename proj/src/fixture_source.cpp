#include "asrh/fixture_source.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>

#include "asrh/audio.hpp"
#include "asrh/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace asrh::source {
namespace {

constexpr std::string_view kTokenPrefix = "offset:";

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

bool duration_matches(plan::DurationClass c, std::uint64_t seconds) {
  switch (c) {
    case plan::DurationClass::Short: return seconds < 240;
    case plan::DurationClass::Medium: return seconds >= 240 && seconds <= 1200;
    case plan::DurationClass::Long: return seconds > 1200;
    case plan::DurationClass::Any: return true;
  }
  return true;
}

std::size_t parse_token(const std::optional<std::string>& token) {
  if (!token) return 0;
  std::string_view t = *token;
  std::size_t n = 0;
  if (t.substr(0, kTokenPrefix.size()) == kTokenPrefix) {
    t.remove_prefix(kTokenPrefix.size());
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
    if (ec == std::errc() && p == t.data() + t.size() && !t.empty()) return n;
  }
  throw Error(ErrorCode::ConfigError, "unrecognised continuation token: " + *token);
}

}  // namespace

FixtureSource::FixtureSource(fs::path root, CaptionPolicy policy) : root_(std::move(root)), policy_(policy) {}

const std::vector<FixtureSource::Meta>& FixtureSource::catalogue() {
  std::call_once(loaded_, [this] {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) throw Error(ErrorCode::ConfigError, "fixture root not found: " + root_.string());
    for (const auto& de : fs::directory_iterator(root_)) {
      const auto meta_path = de.path() / "meta.json";
      if (!de.is_directory() || !fs::exists(meta_path)) continue;
      const json j = read_json(meta_path);
      Meta m;
      try {
        m.entry.video_id = j.value("video_id", de.path().filename().string());
        m.entry.title = j.at("title").get<std::string>();
        m.entry.category_id = j.at("category_id").get<std::string>();
        m.entry.category_name =
            j.value("category_name", category_name_for(m.entry.category_id).value_or(m.entry.category_id));
        m.entry.duration_seconds = j.value("duration_seconds", std::uint64_t{0});
        m.language = j.value("language", "en");
        m.search_rank = j.value("search_rank", std::int64_t{0});
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, meta_path.string() + ": " + e.what());
      }
      catalogue_.push_back(std::move(m));
    }
    std::sort(catalogue_.begin(), catalogue_.end(), [](const Meta& a, const Meta& b) {
      return std::tie(a.search_rank, a.entry.video_id) < std::tie(b.search_rank, b.entry.video_id);
    });
  });
  return catalogue_;
}

std::vector<CaptionTrack> FixtureSource::load_tracks(const std::string& video_id) const {
  const auto path = root_ / video_id / "captions.json";
  std::error_code ec;
  if (!fs::exists(path, ec)) return {};
  const json j = read_json(path);
  std::vector<CaptionTrack> tracks;
  try {
    for (const auto& t : j.at("tracks")) {
      CaptionTrack track;
      track.video_id = video_id;
      track.language = t.at("language").get<std::string>();
      track.is_auto_generated = t.value("is_auto_generated", false);
      for (const auto& s : t.at("segments")) {
        track.segments.push_back(
            {s.value("start", 0.0), s.value("duration", 0.0), s.at("text").get<std::string>()});
      }
      sort_segments(track);
      tracks.push_back(std::move(track));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return tracks;
}

SearchPage FixtureSource::search_videos(const plan::PlanFilters& filters, const std::optional<std::string>& token) {
  const auto& all = catalogue();
  SearchPage page;
  std::size_t i = parse_token(token);
  auto candidate = [&](const Meta& m) {
    return (filters.category_id.empty() || m.entry.category_id == filters.category_id) &&
           language_matches(m.language, filters.language) &&
           duration_matches(filters.duration_class, m.entry.duration_seconds);
  };
  for (; i < all.size() && page.entries.size() < filters.max_results; ++i) {
    const Meta& m = all[i];
    if (!candidate(m)) continue;
    try {
      const auto tracks = load_tracks(m.entry.video_id);
      const auto& chosen = select_track(tracks, m.entry.video_id, filters.language, policy_);
      plan::VideoEntry e = m.entry;
      e.caption_track.language = chosen.language;
      e.caption_track.is_auto_generated = chosen.is_auto_generated;
      page.entries.push_back(std::move(e));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
    }
  }
  if (page.entries.empty()) {
    throw Error(ErrorCode::NoMatches, "no fixture videos match category '" + filters.category_id + "' in " +
                                          filters.language);
  }
  if (std::any_of(all.begin() + static_cast<std::ptrdiff_t>(i), all.end(), candidate)) {
    page.next_token = std::string(kTokenPrefix) + std::to_string(i);
  }
  return page;
}

CaptionTrack FixtureSource::fetch_captions(const std::string& video_id, const std::string& language) {
  const auto tracks = load_tracks(video_id);
  return select_track(tracks, video_id, language, policy_);
}

AudioAsset FixtureSource::acquire_audio(const std::string& video_id, const fs::path& workdir) {
  fs::path original;
  std::error_code ec;
  if (fs::is_directory(root_ / video_id, ec)) {
    for (const auto& de : fs::directory_iterator(root_ / video_id)) {
      if (de.is_regular_file() && de.path().stem() == "audio") {
        original = de.path();
        break;
      }
    }
  }
  if (original.empty()) throw Error(ErrorCode::DownloadFailed, video_id + ": fixture has no audio file");
  return audio_cache_for(workdir).get_or_fetch(video_id, [&](const fs::path& staging) {
    try {
      fs::copy_file(original, staging / (video_id + original.extension().string()));
    } catch (const fs::filesystem_error& e) {
      throw_storage_error(e, video_id);
    }
  });
}

}  // namespace asrh::source
