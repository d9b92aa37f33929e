#include "asrh/source.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "asrh/error.hpp"

namespace asrh::source {
namespace {

constexpr std::array<Category, 15> kCategories = {{
    {"1", "Film & Animation"},
    {"2", "Autos & Vehicles"},
    {"10", "Music"},
    {"15", "Pets & Animals"},
    {"17", "Sports"},
    {"19", "Travel & Events"},
    {"20", "Gaming"},
    {"22", "People & Blogs"},
    {"23", "Comedy"},
    {"24", "Entertainment"},
    {"25", "News & Politics"},
    {"26", "Howto & Style"},
    {"27", "Education"},
    {"28", "Science & Technology"},
    {"29", "Nonprofits & Activism"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view primary_subtag(std::string_view tag) {
  const auto cut = tag.find_first_of("-_");
  return cut == std::string_view::npos ? tag : tag.substr(0, cut);
}

}  // namespace

std::string flatten_transcript(const CaptionTrack& track) {
  std::string out;
  for (const auto& seg : track.segments) {
    if (seg.text.empty()) continue;
    if (!out.empty()) out += ' ';
    out += seg.text;
  }
  return out;
}

void sort_segments(CaptionTrack& track) {
  std::stable_sort(track.segments.begin(), track.segments.end(),
                   [](const CaptionSegment& a, const CaptionSegment& b) { return a.start_seconds < b.start_seconds; });
}

bool language_matches(std::string_view track_language, std::string_view wanted) {
  return iequals(track_language, wanted) || iequals(primary_subtag(track_language), primary_subtag(wanted));
}

const CaptionTrack& select_track(const std::vector<CaptionTrack>& tracks, const std::string& video_id,
                                 const std::string& language, const CaptionPolicy& policy) {
  if (tracks.empty()) throw Error(ErrorCode::NoCaptions, video_id + ": no caption tracks");
  const CaptionTrack* best = nullptr;
  int best_rank = 0;
  bool any_in_language = false;
  for (const auto& t : tracks) {
    if (!language_matches(t.language, language)) continue;
    any_in_language = true;
    if (t.is_auto_generated && !policy.allow_auto_generated) continue;
    // exact human > primary human > exact auto > primary auto
    const int rank = (t.is_auto_generated ? 0 : 2) + (iequals(t.language, language) ? 1 : 0) + 1;
    if (rank > best_rank) {
      best = &t;
      best_rank = rank;
    }
  }
  if (best) return *best;
  if (any_in_language) {
    throw Error(ErrorCode::OnlyAutoGenerated, video_id + ": only auto-generated captions in " + language);
  }
  throw Error(ErrorCode::LanguageUnavailable, video_id + ": no captions in " + language);
}

std::span<const Category> platform_categories() { return kCategories; }

std::optional<std::string> category_id_for(std::string_view name_or_id) {
  for (const auto& c : kCategories) {
    if (c.id == name_or_id || iequals(c.name, name_or_id)) return std::string(c.id);
  }
  return std::nullopt;
}

std::optional<std::string> category_name_for(std::string_view id) {
  for (const auto& c : kCategories) {
    if (c.id == id) return std::string(c.name);
  }
  return std::nullopt;
}

}  // namespace asrh::source
