#include "asrh/testplan.hpp"

#include <cctype>
#include <cmath>
#include <set>

namespace asrh::plan {
namespace {

using json = nlohmann::json;

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + what);
}

[[noreturn]] void invariant(const std::string& what) { throw Error(ErrorCode::InvariantViolation, what); }

// Typed access to one JSON object that remembers which members were consumed,
// so the rest can be kept as Extra.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema(path_, "expected object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const char* key) {
    const json* v = find(key);
    if (!v) schema(path_, std::string("missing required field '") + key + "'");
    return *v;
  }

  std::string string(const char* key) {
    const json& v = require(key);
    if (!v.is_string()) schema(sub(key), "expected string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const char* key) {
    const json* v = find(key);
    if (!v || v->is_null()) return std::nullopt;
    if (!v->is_string()) schema(sub(key), "expected string or null");
    return v->get<std::string>();
  }

  std::uint64_t unsigned_integer(const char* key) {
    return as_unsigned(require(key), sub(key));
  }

  std::uint64_t unsigned_or(const char* key, std::uint64_t fallback) {
    const json* v = find(key);
    return v ? as_unsigned(*v, sub(key)) : fallback;
  }

  bool boolean(const char* key) {
    const json& v = require(key);
    if (!v.is_boolean()) schema(sub(key), "expected boolean");
    return v.get<bool>();
  }

  const json& array(const char* key) {
    const json& v = require(key);
    if (!v.is_array()) schema(sub(key), "expected array");
    return v;
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }

  Extra rest() const {
    Extra out = Extra::object();
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) out[it.key()] = it.value();
    }
    return out;
  }

 private:
  static std::uint64_t as_unsigned(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) schema(path, "must be non-negative");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    schema(path, "expected non-negative integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void merge_extra(json& out, const Extra& extra) {
  if (!extra.is_object()) return;
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    if (!out.contains(it.key())) out[it.key()] = it.value();
  }
}

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

// --- to JSON ---------------------------------------------------------------

json filters_to_json(const PlanFilters& f) {
  json j = {{"category_id", f.category_id},     {"language", f.language},
            {"max_results", f.max_results},     {"duration_class", to_string(f.duration_class)},
            {"region", opt(f.region)}};
  merge_extra(j, f.extra);
  return j;
}

json counts_to_json(const metrics::AlignmentCounts& c) {
  return {{"substitutions", c.substitutions}, {"deletions", c.deletions},       {"insertions", c.insertions},
          {"reference_length", c.reference_length}, {"correct", c.correct}};
}

json outcome_to_json(const TestOutcome& o) {
  json flags = json::array();
  for (const auto& f : o.audit_flags) {
    flags.push_back({{"kind", to_string(f.kind)}, {"score", f.score}, {"evidence", f.evidence}});
  }
  json j = {
      {"wer", o.wer ? json(o.wer->value()) : json(nullptr)},
      {"counts", o.counts ? counts_to_json(*o.counts) : json(nullptr)},
      {"engine_label", o.engine_label},
      {"normalized_ref_words", o.normalized_ref_words},
      {"runtime_ms", o.runtime_ms},
      {"error", o.error ? json{{"code", to_string(o.error->code)}, {"message", o.error->message}} : json(nullptr)},
      {"audit_flags", flags},
      {"normalization", {{"reference", o.reference_rules_version}, {"hypothesis", o.hypothesis_rules_version}}},
      {"warnings", o.warnings},
  };
  merge_extra(j, o.extra);
  return j;
}

json entry_to_json(const VideoEntry& e) {
  json track = {{"language", e.caption_track.language}, {"is_auto_generated", e.caption_track.is_auto_generated}};
  merge_extra(track, e.caption_track.extra);
  json j = {{"video_id", e.video_id},
            {"title", e.title},
            {"category_id", e.category_id},
            {"category_name", e.category_name},
            {"duration_seconds", e.duration_seconds},
            {"caption_track", track}};
  if (e.outcome) j["outcome"] = outcome_to_json(*e.outcome);
  merge_extra(j, e.extra);
  return j;
}

// --- from JSON -------------------------------------------------------------

PlanFilters filters_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  PlanFilters f;
  f.category_id = r.string("category_id");
  f.language = r.string("language");
  const auto max_results = r.unsigned_integer("max_results");
  if (max_results > UINT32_MAX) schema(r.sub("max_results"), "out of range");
  f.max_results = static_cast<std::uint32_t>(max_results);
  const std::string dc = r.string("duration_class");
  auto parsed = parse_duration_class(dc);
  if (!parsed) schema(r.sub("duration_class"), "expected one of short, medium, long, any");
  f.duration_class = *parsed;
  f.region = r.optional_string("region");
  f.extra = r.rest();
  return f;
}

metrics::AlignmentCounts counts_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  metrics::AlignmentCounts c;
  c.substitutions = r.unsigned_integer("substitutions");
  c.deletions = r.unsigned_integer("deletions");
  c.insertions = r.unsigned_integer("insertions");
  c.reference_length = r.unsigned_integer("reference_length");
  c.correct = r.unsigned_integer("correct");
  return c;
}

TestOutcome outcome_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TestOutcome o;
  if (const json* w = r.find("wer"); w && !w->is_null()) {
    if (!w->is_number()) schema(r.sub("wer"), "expected number or null");
    const double v = w->get<double>();
    if (!(v >= 0.0) || !std::isfinite(v)) invariant(r.sub("wer") + ": must be a finite non-negative number");
    o.wer = metrics::WerScore(v);
  }
  if (const json* c = r.find("counts"); c && !c->is_null()) o.counts = counts_from_json(*c, r.sub("counts"));
  o.engine_label = r.string("engine_label");
  o.normalized_ref_words = r.unsigned_or("normalized_ref_words", 0);
  if (const json* rt = r.find("runtime_ms"); rt) {
    if (!rt->is_number_integer()) schema(r.sub("runtime_ms"), "expected integer");
    o.runtime_ms = rt->get<std::int64_t>();
  }
  if (const json* e = r.find("error"); e && !e->is_null()) {
    ObjectReader er(*e, r.sub("error"));
    OutcomeError err;
    const std::string code = er.string("code");
    if (!parse_error_code(code, err.code)) schema(er.sub("code"), "unknown error code '" + code + "'");
    err.message = er.optional_string("message").value_or("");
    o.error = err;
  }
  if (const json* flags = r.find("audit_flags"); flags) {
    if (!flags->is_array()) schema(r.sub("audit_flags"), "expected array");
    for (std::size_t i = 0; i < flags->size(); ++i) {
      ObjectReader fr((*flags)[i], r.sub("audit_flags[" + std::to_string(i) + "]"));
      DiscrepancyFlag f;
      const std::string kind = fr.string("kind");
      auto k = parse_flag_kind(kind);
      if (!k) schema(fr.sub("kind"), "unknown flag kind '" + kind + "'");
      f.kind = *k;
      const json& score = fr.require("score");
      if (!score.is_number()) schema(fr.sub("score"), "expected number");
      f.score = score.get<double>();
      f.evidence = fr.optional_string("evidence").value_or("");
      o.audit_flags.push_back(std::move(f));
    }
  }
  if (const json* n = r.find("normalization"); n && !n->is_null()) {
    ObjectReader nr(*n, r.sub("normalization"));
    o.reference_rules_version = nr.optional_string("reference").value_or("");
    o.hypothesis_rules_version = nr.optional_string("hypothesis").value_or("");
  }
  if (const json* w = r.find("warnings"); w) {
    if (!w->is_array()) schema(r.sub("warnings"), "expected array");
    for (const auto& item : *w) {
      if (!item.is_string()) schema(r.sub("warnings"), "expected array of strings");
      o.warnings.push_back(item.get<std::string>());
    }
  }
  o.extra = r.rest();
  return o;
}

VideoEntry entry_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  VideoEntry e;
  e.video_id = r.string("video_id");
  e.title = r.string("title");
  e.category_id = r.string("category_id");
  e.category_name = r.string("category_name");
  e.duration_seconds = r.unsigned_integer("duration_seconds");
  {
    ObjectReader tr(r.require("caption_track"), r.sub("caption_track"));
    e.caption_track.language = tr.string("language");
    e.caption_track.is_auto_generated = tr.boolean("is_auto_generated");
    e.caption_track.extra = tr.rest();
  }
  if (const json* o = r.find("outcome"); o && !o->is_null()) e.outcome = outcome_from_json(*o, r.sub("outcome"));
  e.extra = r.rest();
  return e;
}

void validate_outcome(const TestOutcome& o, const std::string& where) {
  if (o.wer.has_value() == o.error.has_value()) {
    invariant(where + ": outcome must carry exactly one of wer and error");
  }
  if (o.wer && o.counts) {
    if (o.counts->reference_length == 0) invariant(where + ": wer present with empty reference");
    const double expect = static_cast<double>(o.counts->errors()) / static_cast<double>(o.counts->reference_length);
    if (std::fabs(o.wer->value() - expect) >= 1e-12) invariant(where + ": wer inconsistent with counts");
  }
  if (o.counts && o.counts->substitutions + o.counts->deletions + o.counts->correct != o.counts->reference_length) {
    invariant(where + ": counts do not cover the reference");
  }
  for (const auto& f : o.audit_flags) {
    if (!(f.score >= 0.0 && f.score <= 1.0)) invariant(where + ": flag score outside [0, 1]");
  }
}

}  // namespace

std::string_view to_string(DurationClass d) noexcept {
  switch (d) {
    case DurationClass::Short: return "short";
    case DurationClass::Medium: return "medium";
    case DurationClass::Long: return "long";
    case DurationClass::Any: return "any";
  }
  return "any";
}

std::optional<DurationClass> parse_duration_class(std::string_view s) noexcept {
  if (s == "short") return DurationClass::Short;
  if (s == "medium") return DurationClass::Medium;
  if (s == "long") return DurationClass::Long;
  if (s == "any") return DurationClass::Any;
  return std::nullopt;
}

std::string_view to_string(FlagKind k) noexcept {
  switch (k) {
    case FlagKind::LikelySeo: return "likely_seo";
    case FlagKind::LikelyDescriptive: return "likely_descriptive";
    case FlagKind::HighWer: return "high_wer";
    case FlagKind::EmptyReference: return "empty_reference";
    case FlagKind::Normal: return "normal";
  }
  return "normal";
}

std::optional<FlagKind> parse_flag_kind(std::string_view s) noexcept {
  for (auto k : {FlagKind::LikelySeo, FlagKind::LikelyDescriptive, FlagKind::HighWer, FlagKind::EmptyReference,
                 FlagKind::Normal}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool is_language_tag(std::string_view tag) noexcept {
  std::size_t i = 0;
  bool first = true;
  while (true) {
    const std::size_t start = i;
    while (i < tag.size() && tag[i] != '-') ++i;
    const std::string_view part = tag.substr(start, i - start);
    if (first) {
      if (part.size() < 2 || part.size() > 8) return false;
      for (char c : part) {
        if (!std::isalpha(static_cast<unsigned char>(c))) return false;
      }
    } else {
      if (part.empty() || part.size() > 8) return false;
      for (char c : part) {
        if (!std::isalnum(static_cast<unsigned char>(c))) return false;
      }
    }
    first = false;
    if (i == tag.size()) return true;
    ++i;  // skip '-'
  }
}

void validate_plan(const TestPlan& plan) {
  if (plan.plan_id.empty()) invariant("plan_id is empty");
  if (!is_rfc3339(plan.created_at)) invariant("created_at is not an RFC 3339 timestamp: '" + plan.created_at + "'");
  for (std::size_t i = 0; i < plan.filters.size(); ++i) {
    const auto& f = plan.filters[i];
    const std::string where = "filters[" + std::to_string(i) + "]";
    if (f.max_results < 1) invariant(where + ": max_results must be at least 1");
    if (!is_language_tag(f.language)) invariant(where + ": invalid language tag '" + f.language + "'");
    if (f.region && (f.region->size() != 2 || !std::isalpha(static_cast<unsigned char>((*f.region)[0])) ||
                     !std::isalpha(static_cast<unsigned char>((*f.region)[1])))) {
      invariant(where + ": region must be a two-letter country code");
    }
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < plan.videos.size(); ++i) {
    const auto& v = plan.videos[i];
    const std::string where = "videos[" + std::to_string(i) + "]";
    if (v.video_id.empty()) invariant(where + ": video_id is empty");
    if (!ids.insert(v.video_id).second) invariant(where + ": duplicate video_id '" + v.video_id + "'");
    if (v.outcome) validate_outcome(*v.outcome, where + ".outcome");
  }
}

TestPlan build_plan(std::vector<PlanFilters> filters, std::vector<VideoEntry> entries,
                    std::optional<std::string> token, Clock& clock) {
  if (entries.empty()) throw Error(ErrorCode::EmptyPlan, "a plan needs at least one video");
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (!ids.insert(e.video_id).second) {
      throw Error(ErrorCode::DuplicateVideo, "video '" + e.video_id + "' appears more than once");
    }
  }
  TestPlan plan;
  plan.plan_id = clock.new_id("plan");
  plan.created_at = clock.now_rfc3339();
  plan.filters = std::move(filters);
  plan.continuation_token = std::move(token);
  plan.videos = std::move(entries);
  validate_plan(plan);
  return plan;
}

TestPlan parse_plan(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    schema("$", std::string("invalid JSON: ") + e.what());
  }
  ObjectReader r(j, "$");
  TestPlan plan;
  plan.plan_id = r.string("plan_id");
  plan.created_at = r.string("created_at");
  const json& filters = r.array("filters");
  for (std::size_t i = 0; i < filters.size(); ++i) {
    plan.filters.push_back(filters_from_json(filters[i], "$.filters[" + std::to_string(i) + "]"));
  }
  plan.continuation_token = r.optional_string("continuation_token");
  plan.engine_label = r.optional_string("engine_label");
  const json& videos = r.array("videos");
  for (std::size_t i = 0; i < videos.size(); ++i) {
    plan.videos.push_back(entry_from_json(videos[i], "$.videos[" + std::to_string(i) + "]"));
  }
  plan.extra = r.rest();
  validate_plan(plan);
  return plan;
}

std::string serialize_plan(const TestPlan& plan) {
  json filters = json::array();
  for (const auto& f : plan.filters) filters.push_back(filters_to_json(f));
  json videos = json::array();
  for (const auto& v : plan.videos) videos.push_back(entry_to_json(v));
  json j = {{"plan_id", plan.plan_id},
            {"created_at", plan.created_at},
            {"filters", filters},
            {"continuation_token", opt(plan.continuation_token)},
            {"engine_label", opt(plan.engine_label)},
            {"videos", videos}};
  merge_extra(j, plan.extra);
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace asrh::plan
