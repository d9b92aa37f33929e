#include "asrh/youtube_source.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>

#include "asrh/error.hpp"
#include "http.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace asrh::source {
namespace {

constexpr int kMaxSearchPages = 50;

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string primary_subtag(const std::string& tag) { return tag.substr(0, tag.find_first_of("-_")); }

[[noreturn]] void throw_api_error(const http::Response& r, const std::string& what) {
  std::string reason, message;
  const json body = json::parse(r.body, nullptr, false);
  if (body.is_object() && body.contains("error") && body["error"].is_object()) {
    const auto& e = body["error"];
    if (e.contains("message") && e["message"].is_string()) message = e["message"].get<std::string>();
    if (e.contains("errors") && e["errors"].is_array() && !e["errors"].empty() && e["errors"][0].is_object()) {
      reason = e["errors"][0].value("reason", "");
    }
  }
  const std::string detail = what + ": HTTP " + std::to_string(r.status) + (reason.empty() ? "" : " " + reason) +
                             (message.empty() ? "" : ": " + message);
  if (r.status == 401) throw Error(ErrorCode::AuthError, detail);
  if (r.status == 403) {
    static const std::array<std::string_view, 4> quota = {"quotaExceeded", "dailyLimitExceeded",
                                                          "rateLimitExceeded", "userRateLimitExceeded"};
    if (std::find(quota.begin(), quota.end(), reason) != quota.end()) throw Error(ErrorCode::QuotaExceeded, detail);
    throw Error(ErrorCode::AuthError, detail);
  }
  if (r.status == 400 && (reason == "keyInvalid" || message.find("API key") != std::string::npos)) {
    throw Error(ErrorCode::AuthError, detail);
  }
  if (r.status == 429) throw Error(ErrorCode::QuotaExceeded, detail);
  if (r.status >= 500) throw Error(ErrorCode::NetworkError, detail);
  throw Error(ErrorCode::ConfigError, detail);
}

http::Response fetch(const std::string& url, const http::Params& params, std::chrono::milliseconds timeout) {
  try {
    return http::get(url, params, timeout);
  } catch (const http::TransportError& e) {
    throw Error(ErrorCode::NetworkError, e.what());
  }
}

json api_get(const YouTubeConfig& cfg, const std::string& resource, http::Params params) {
  if (cfg.api_key.empty()) throw Error(ErrorCode::AuthError, "no API key configured (set ASRH_API_KEY)");
  params.emplace("key", cfg.api_key);
  const auto r = fetch(cfg.api_base + "/" + resource, params, cfg.http_timeout);
  if (r.status != 200) throw_api_error(r, resource);
  json j = json::parse(r.body, nullptr, false);
  if (!j.is_object()) throw Error(ErrorCode::NetworkError, resource + ": response is not a JSON object");
  return j;
}

std::string str_at(const json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

std::optional<std::uint64_t> parse_iso8601_duration(std::string_view s) {
  if (s.size() < 2 || s[0] != 'P') return std::nullopt;
  std::uint64_t total = 0, value = 0;
  bool in_time = false, have_digits = false, any = false;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const char c = s[i];
    if (c >= '0' && c <= '9') {
      value = value * 10 + static_cast<std::uint64_t>(c - '0');
      have_digits = true;
      continue;
    }
    if (c == 'T') {
      if (in_time || have_digits) return std::nullopt;
      in_time = true;
      continue;
    }
    if (!have_digits) return std::nullopt;
    std::uint64_t unit = 0;
    if (!in_time && c == 'W') unit = 7 * 86400;
    else if (!in_time && c == 'D') unit = 86400;
    else if (in_time && c == 'H') unit = 3600;
    else if (in_time && c == 'M') unit = 60;
    else if (in_time && c == 'S') unit = 1;
    else return std::nullopt;
    total += value * unit;
    value = 0;
    have_digits = false;
    any = true;
  }
  if (have_digits || !any) return std::nullopt;
  return total;
}

YouTubeConfig YouTubeConfig::from_environment() {
  YouTubeConfig c;
  c.api_key = env_or("ASRH_API_KEY", "");
  c.downloader = env_or("ASRH_DOWNLOADER", c.downloader);
  c.api_base = env_or("ASRH_API_BASE", c.api_base);
  c.timedtext_base = env_or("ASRH_TIMEDTEXT_BASE", c.timedtext_base);
  return c;
}

YouTubeSource::YouTubeSource(YouTubeConfig config)
    : config_(std::move(config)), downloader_(config_.downloader, config_.download_concurrency) {}

std::vector<YouTubeSource::TrackInfo> YouTubeSource::list_tracks(const std::string& video_id) {
  json j;
  try {
    j = api_get(config_, "captions", {{"part", "snippet"}, {"videoId", video_id}});
  } catch (const Error& e) {
    // captions.list answers 404 for deleted or private videos
    if (e.code() == ErrorCode::ConfigError) throw Error(ErrorCode::NoCaptions, video_id + ": " + e.what());
    throw;
  }
  std::vector<TrackInfo> tracks;
  if (!j.contains("items") || !j["items"].is_array()) return tracks;
  for (const auto& item : j["items"]) {
    if (!item.contains("snippet")) continue;
    const auto& sn = item["snippet"];
    TrackInfo t;
    t.language = str_at(sn, "language");
    t.name = str_at(sn, "name");
    t.is_auto_generated = str_at(sn, "trackKind") == "asr";
    if (!t.language.empty()) tracks.push_back(std::move(t));
  }
  return tracks;
}

SearchPage YouTubeSource::search_videos(const plan::PlanFilters& filters, const std::optional<std::string>& token) {
  SearchPage page;
  std::optional<std::string> page_token = token;
  for (int pages = 0; pages < kMaxSearchPages && page.entries.size() < filters.max_results; ++pages) {
    const auto remaining = filters.max_results - page.entries.size();
    http::Params params = {{"part", "snippet"},
                           {"type", "video"},
                           {"order", "relevance"},
                           {"maxResults", std::to_string(std::min<std::size_t>(50, remaining))},
                           {"relevanceLanguage", primary_subtag(filters.language)}};
    if (!config_.captions.allow_auto_generated) params.emplace("videoCaption", "closedCaption");
    if (!filters.category_id.empty()) params.emplace("videoCategoryId", filters.category_id);
    if (filters.duration_class != plan::DurationClass::Any) {
      params.emplace("videoDuration", std::string(plan::to_string(filters.duration_class)));
    }
    if (filters.region) params.emplace("regionCode", *filters.region);
    if (page_token) params.emplace("pageToken", *page_token);

    const json found = api_get(config_, "search", params);
    std::vector<std::string> ids;
    if (found.contains("items") && found["items"].is_array()) {
      for (const auto& item : found["items"]) {
        if (item.contains("id") && item["id"].is_object()) {
          const auto id = str_at(item["id"], "videoId");
          if (!id.empty()) ids.push_back(id);
        }
      }
    }
    page_token.reset();
    if (auto next = str_at(found, "nextPageToken"); !next.empty()) page_token = next;

    if (!ids.empty()) {
      std::string joined;
      for (const auto& id : ids) joined += (joined.empty() ? "" : ",") + id;
      const json details = api_get(config_, "videos", {{"part", "snippet,contentDetails"}, {"id", joined}});
      std::map<std::string, json> by_id;
      if (details.contains("items") && details["items"].is_array()) {
        for (const auto& item : details["items"]) by_id[str_at(item, "id")] = item;
      }
      for (const auto& id : ids) {
        if (page.entries.size() >= filters.max_results) break;
        auto it = by_id.find(id);
        if (it == by_id.end()) continue;
        const json& item = it->second;
        const json sn = item.value("snippet", json::object());
        const json cd = item.value("contentDetails", json::object());
        plan::VideoEntry e;
        e.video_id = id;
        e.title = str_at(sn, "title");
        e.category_id = str_at(sn, "categoryId");
        e.category_name = category_name_for(e.category_id).value_or(e.category_id);
        e.duration_seconds = parse_iso8601_duration(str_at(cd, "duration")).value_or(0);
        std::vector<CaptionTrack> tracks;
        for (const auto& t : list_tracks(id)) tracks.push_back({id, t.language, t.is_auto_generated, {}});
        try {
          const auto& chosen = select_track(tracks, id, filters.language, config_.captions);
          e.caption_track.language = chosen.language;
          e.caption_track.is_auto_generated = chosen.is_auto_generated;
        } catch (const Error&) {
          continue;
        }
        page.entries.push_back(std::move(e));
      }
    }
    if (!page_token) break;
  }
  if (page.entries.empty()) {
    throw Error(ErrorCode::NoMatches, "no videos with captions in " + filters.language + " for category '" +
                                          filters.category_id + "'");
  }
  page.next_token = page_token;
  return page;
}

CaptionTrack YouTubeSource::fetch_captions(const std::string& video_id, const std::string& language) {
  const auto infos = list_tracks(video_id);
  std::vector<CaptionTrack> tracks;
  for (const auto& t : infos) tracks.push_back({video_id, t.language, t.is_auto_generated, {}});
  const CaptionTrack& chosen = select_track(tracks, video_id, language, config_.captions);
  const TrackInfo& info = infos[static_cast<std::size_t>(&chosen - tracks.data())];

  http::Params params = {{"v", video_id}, {"lang", info.language}, {"fmt", "json3"}};
  if (!info.name.empty()) params.emplace("name", info.name);
  if (info.is_auto_generated) params.emplace("kind", "asr");
  const auto r = fetch(config_.timedtext_base, params, config_.http_timeout);
  if (r.status >= 500) throw Error(ErrorCode::NetworkError, video_id + ": timedtext HTTP " + std::to_string(r.status));
  if (r.status != 200) throw Error(ErrorCode::NoCaptions, video_id + ": timedtext HTTP " + std::to_string(r.status));

  CaptionTrack track{video_id, info.language, info.is_auto_generated, {}};
  const json body = json::parse(r.body, nullptr, false);
  if (body.is_object() && body.contains("events") && body["events"].is_array()) {
    for (const auto& ev : body["events"]) {
      if (!ev.is_object() || !ev.contains("segs") || !ev["segs"].is_array()) continue;
      std::string text;
      for (const auto& seg : ev["segs"]) text += str_at(seg, "utf8");
      if (text.find_first_not_of(" \n") == std::string::npos) continue;
      track.segments.push_back({ev.value("tStartMs", 0.0) / 1000.0, ev.value("dDurationMs", 0.0) / 1000.0, text});
    }
  }
  if (track.segments.empty()) throw Error(ErrorCode::NoCaptions, video_id + ": caption track is empty");
  sort_segments(track);
  return track;
}

AudioAsset YouTubeSource::acquire_audio(const std::string& video_id, const fs::path& workdir) {
  return audio_cache_for(workdir).get_or_fetch(video_id, [&](const fs::path& staging) {
    downloader_.download(config_.watch_url_prefix + video_id, video_id, staging);
  });
}

}  // namespace asrh::source
