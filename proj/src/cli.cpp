#include "asrh/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "asrh/audit.hpp"
#include "asrh/engine.hpp"
#include "asrh/error.hpp"
#include "asrh/fixture_source.hpp"
#include "asrh/normalizer.hpp"
#include "asrh/runner.hpp"
#include "asrh/store.hpp"
#include "asrh/youtube_source.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace asrh::cli {
namespace {

struct GenerateArgs {
  std::vector<std::string> categories;
  std::uint32_t count = 10;
  std::string language = "en";
  std::string duration = "any";
  std::string region;
  std::string output;
  std::string from;
  std::string fixture_source;
  bool include_auto = false;
  bool fixed_clock = false;
};

struct RunArgs {
  std::string plan;
  std::string engine;
  std::string engines;
  std::string db;
  std::string output = "results.json";
  std::string workdir = "asrh-work";
  std::string fixture_source;
  std::string rules;
  std::size_t workers = 4;
  std::ptrdiff_t engine_concurrency = 1;
  std::ptrdiff_t download_concurrency = 4;
  double high_wer = 1.0;
  bool force = false;
  bool include_auto = false;
  bool fixed_clock = false;
};

struct StatsArgs {
  std::string db;
  std::string group_by = "category";
  std::string format = "text";
  std::string engine;
  std::string run;
};

struct AuditArgs {
  std::string db;
  double threshold = 1.0;
  std::string engine;
  std::string run;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::unique_ptr<Clock> make_clock(bool fixed) {
  if (fixed) return std::make_unique<FixedClock>();
  return std::make_unique<SystemClock>();
}

std::unique_ptr<source::VideoSource> make_source(const std::string& fixture_dir, bool include_auto,
                                                 std::ptrdiff_t download_concurrency = 4) {
  source::CaptionPolicy policy{include_auto};
  if (!fixture_dir.empty()) return std::make_unique<source::FixtureSource>(fixture_dir, policy);
  auto cfg = source::YouTubeConfig::from_environment();
  if (cfg.api_key.empty()) throw Error(ErrorCode::AuthError, "ASRH_API_KEY is not set (or pass --fixture-source)");
  cfg.captions = policy;
  cfg.download_concurrency = download_concurrency;
  return std::make_unique<source::YouTubeSource>(std::move(cfg));
}

std::string resolve_db(const std::string& flag) { return flag.empty() ? env_or("ASRH_DB", "asrh.db") : flag; }

engine::EngineRegistry load_registry(const RunArgs& a) {
  std::vector<fs::path> candidates;
  if (!a.engines.empty()) candidates.emplace_back(a.engines);
  else if (auto env = env_or("ASRH_ENGINES", ""); !env.empty()) candidates.emplace_back(env);
  else {
    if (!a.fixture_source.empty()) candidates.push_back(fs::path(a.fixture_source) / "engines.json");
    candidates.emplace_back("engines.json");
  }
  for (const auto& c : candidates) {
    std::error_code ec;
    if (fs::is_regular_file(c, ec)) return engine::EngineRegistry::load(c);
  }
  throw Error(ErrorCode::ConfigError, "no engine registry found (pass --engines or set ASRH_ENGINES)");
}

/// The stored token is the platform's own for a single filter and a JSON
/// array of per-filter tokens otherwise.
std::string encode_tokens(const std::vector<std::optional<std::string>>& tokens) {
  if (tokens.size() == 1) return tokens[0].value_or("");
  json a = json::array();
  for (const auto& t : tokens) a.push_back(t ? json(*t) : json(nullptr));
  return a.dump();
}

std::vector<std::optional<std::string>> decode_tokens(const std::optional<std::string>& stored, std::size_t n) {
  std::vector<std::optional<std::string>> out(n);
  if (!stored || stored->empty()) return out;
  if (n == 1) {
    out[0] = *stored;
    return out;
  }
  const json a = json::parse(*stored, nullptr, false);
  if (!a.is_array() || a.size() != n) {
    throw Error(ErrorCode::ConfigError, "continuation_token does not hold one token per filter");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].is_string()) out[i] = a[i].get<std::string>();
  }
  return out;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> missing;
  if (a.categories.empty() && a.from.empty()) missing.emplace_back("--category (or --from)");
  if (a.output.empty()) missing.emplace_back("-o/--output");
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw UsageError("missing required flags: " + list + " (see generate --help)");
  }
  auto clock = make_clock(a.fixed_clock);
  std::vector<plan::PlanFilters> filters;
  std::vector<std::optional<std::string>> tokens;
  std::set<std::string> already_tested;
  if (!a.from.empty()) {
    const auto previous = plan::parse_plan(read_text(a.from));
    if (previous.filters.empty()) throw Error(ErrorCode::ConfigError, a.from + " records no search filters");
    filters = previous.filters;
    tokens = decode_tokens(previous.continuation_token, filters.size());
    bool any = false;
    for (const auto& t : tokens) any = any || t.has_value();
    if (!any) throw Error(ErrorCode::NoMatches, a.from + " has no continuation token: its searches are exhausted");
    for (const auto& v : previous.videos) already_tested.insert(v.video_id);
  } else {
    const auto duration = plan::parse_duration_class(a.duration);
    if (!duration) throw UsageError("--duration must be short, medium, long or any");
    if (!plan::is_language_tag(a.language)) throw UsageError("--language must be a language tag such as en");
    if (a.count == 0) throw UsageError("--count must be at least 1");
    for (const auto& c : a.categories) {
      const auto id = source::category_id_for(c);
      if (!id) throw UsageError("unknown category: " + c);
      plan::PlanFilters f;
      f.category_id = *id;
      f.language = a.language;
      f.max_results = a.count;
      f.duration_class = *duration;
      if (!a.region.empty()) f.region = a.region;
      filters.push_back(f);
    }
    tokens.assign(filters.size(), std::nullopt);
  }

  auto src = make_source(a.fixture_source, a.include_auto);
  std::vector<plan::VideoEntry> entries;
  std::set<std::string> seen = already_tested;
  std::vector<std::pair<std::string, std::size_t>> table;
  std::vector<std::optional<std::string>> next_tokens(filters.size());
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const auto& f = filters[i];
    const auto name = source::category_name_for(f.category_id).value_or(f.category_id);
    std::size_t taken = 0;
    if (!a.from.empty() && !tokens[i]) {
      table.emplace_back(name, 0);
      continue;
    }
    try {
      auto page = src->search_videos(f, tokens[i]);
      next_tokens[i] = page.next_token;
      for (auto& e : page.entries) {
        if (!seen.insert(e.video_id).second) continue;
        entries.push_back(std::move(e));
        ++taken;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoMatches) throw;
      err << "warning: " << e.what() << "\n";
    }
    if (taken < f.max_results) err << "warning: " << name << ": " << taken << " of " << f.max_results << " videos\n";
    table.emplace_back(name, taken);
  }

  bool any_token = false;
  for (const auto& t : next_tokens) any_token = any_token || t.has_value();
  auto p = plan::build_plan(filters, std::move(entries), any_token ? std::optional(encode_tokens(next_tokens)) : std::nullopt,
                            *clock);
  runner::write_file_atomically(a.output, plan::serialize_plan(p));

  std::size_t width = 8;
  for (const auto& [name, _] : table) width = std::max(width, name.size());
  out << pad("Category", width) << "  Number of videos\n";
  for (const auto& [name, n] : table) out << pad(name, width) << "  " << n << "\n";
  out << pad("Total", width) << "  " << p.videos.size() << "\n";
  return kExitOk;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  auto clock = make_clock(a.fixed_clock);
  const auto p = plan::parse_plan(read_text(a.plan));
  const auto registry = load_registry(a);
  std::string label = a.engine;
  if (label.empty()) {
    if (registry.labels().size() != 1) throw UsageError("--engine is required when the registry has several engines");
    label = registry.labels().front();
  }
  const auto& spec = registry.get(label);
  const auto rules = a.rules.empty() ? normalizer::default_rules() : normalizer::load_rules(a.rules);

  auto src = make_source(a.fixture_source, a.include_auto, a.download_concurrency);
  engine::Transcriber transcriber(*clock, a.engine_concurrency);
  const std::string db_path = resolve_db(a.db);
  store::ResultStore db = [&] {
    try {
      return store::ResultStore::open(db_path);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::StorageCorrupt) throw;
      throw Error(ErrorCode::SinkUnavailable, e.what());
    }
  }();
  runner::StoreSink sink(db, a.output, *clock, clock->new_id("run"));

  runner::RunOptions opts;
  opts.workers = a.workers;
  opts.force = a.force;
  opts.workdir = a.workdir;
  opts.audit.high_wer = a.high_wer;
  opts.progress = &err;
  const auto summary = runner::run_plan(p, spec, *src, transcriber, sink, rules, *clock, opts);

  out << "run " << sink.run_id() << ": " << summary.scored << " scored, " << summary.errored << " errored";
  if (summary.reused) out << ", " << summary.reused << " kept from the input";
  out << "\nresults: " << a.output << "\ndatabase: " << db_path << "\n";
  if (sink.duplicates()) err << "DuplicateKey: " << sink.duplicates() << " records were already stored\n";
  return summary.exit_code();
}

store::RecordFilter record_filter(const std::string& engine, const std::string& run) {
  store::RecordFilter f;
  if (!engine.empty()) f.engine_label = engine;
  if (!run.empty()) f.run_id = run;
  return f;
}

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream& err) {
  const auto db = store::ResultStore::open_readonly(resolve_db(a.db));
  const auto records = db.query(record_filter(a.engine, a.run));
  std::vector<store::StatsSummary> summaries;
  try {
    summaries = store::summarize(records, a.group_by == "engine" ? store::GroupBy::Engine : store::GroupBy::Category);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptySelection) throw;
    err << "EmptySelection: " << e.what() << "\n";
    return kExitPartial;
  }
  out << store::export_table(summaries, a.format == "csv" ? store::TableFormat::Csv : store::TableFormat::Text);
  return kExitOk;
}

int cmd_audit(const AuditArgs& a, std::ostream& out, std::ostream&) {
  const auto db = store::ResultStore::open_readonly(resolve_db(a.db));
  const auto rows = store::audit_report(db.query(record_filter(a.engine, a.run)), a.threshold);
  if (rows.empty()) {
    out << "no findings\n";
    return kExitOk;
  }
  std::vector<std::array<std::string, 5>> cells = {{"WER", "Engine", "Video", "Category", "Flags"}};
  for (const auto& r : rows) {
    std::string flags;
    for (const auto& f : r.flags) {
      char score[16];
      std::snprintf(score, sizeof score, "%.2f", f.score);
      flags += (flags.empty() ? "" : ", ") + std::string(plan::to_string(f.kind)) + "(" + score + ")";
    }
    cells.push_back({r.record.wer ? store::format_number(*r.record.wer) : "-", r.record.engine_label,
                     r.record.video_id, r.record.category_name, flags});
  }
  std::array<std::size_t, 5> w{};
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < c.size(); ++i) w[i] = std::max(w[i], c[i].size());
  }
  for (const auto& c : cells) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i) out << pad(c[i], w[i]) << "  ";
    out << c.back() << "\n";
  }
  return kExitOk;
}

int exit_code_for(ErrorCode c) {
  return c == ErrorCode::EmptySelection ? kExitPartial : kExitAborted;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word error rate test harness for speech recognition engines over captioned online video.", "asrh"};
  app.set_version_flag("--version", std::string(ASRH_VERSION));
  app.require_subcommand(1);

  GenerateArgs g;
  auto* gen = app.add_subcommand("generate", "Search the platform and write a test plan");
  gen->add_option("--category", g.categories, "Category name or id; repeat for several")->type_name("NAME");
  gen->add_option("--count", g.count, "Videos per category")->capture_default_str();
  gen->add_option("--language", g.language, "Caption language tag")->capture_default_str();
  gen->add_option("--duration", g.duration, "short, medium, long or any")->capture_default_str();
  gen->add_option("--region", g.region, "Region code for the search, e.g. US");
  gen->add_option("-o,--output", g.output, "Plan file to write (required)");
  gen->add_option("--from", g.from, "Continue the searches recorded in a plan or results file")
      ->check(CLI::ExistingFile);
  gen->add_option("--fixture-source", g.fixture_source, "Offline fixture directory instead of the platform")
      ->check(CLI::ExistingDirectory);
  gen->add_flag("--include-auto-captions", g.include_auto, "Accept auto-generated caption tracks");
  gen->add_flag("--fixed-clock", g.fixed_clock, "Constant timestamps and sequential ids");

  RunArgs r;
  auto* run = app.add_subcommand("run", "Transcribe and score every video in a plan");
  run->add_option("--plan", r.plan, "Plan or results file")->required()->check(CLI::ExistingFile);
  run->add_option("--engine", r.engine, "Engine label from the registry");
  run->add_option("--engines", r.engines, "Engine registry file (default: $ASRH_ENGINES, then engines.json)")
      ->check(CLI::ExistingFile);
  run->add_option("--db", r.db, "Results database (default: $ASRH_DB, then asrh.db)");
  run->add_option("-o,--output", r.output, "Results file to write")->capture_default_str();
  run->add_option("--workdir", r.workdir, "Audio cache directory")->capture_default_str();
  run->add_option("--fixture-source", r.fixture_source, "Offline fixture directory instead of the platform")
      ->check(CLI::ExistingDirectory);
  run->add_option("--rules", r.rules, "Normalization rule file (default: built-in English rules)")
      ->check(CLI::ExistingFile);
  run->add_option("--workers", r.workers, "Videos processed concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--engine-concurrency", r.engine_concurrency, "Transcriptions in flight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--download-concurrency", r.download_concurrency, "Audio downloads in flight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--high-wer-threshold", r.high_wer, "WER above which high_wer is flagged")->capture_default_str();
  run->add_flag("--force", r.force, "Recompute entries that already have a score");
  run->add_flag("--include-auto-captions", r.include_auto, "Accept auto-generated caption tracks");
  run->add_flag("--fixed-clock", r.fixed_clock, "Constant timestamps and sequential ids");

  StatsArgs s;
  auto* stats = app.add_subcommand("stats", "Print WER statistics per category or engine");
  stats->add_option("--db", s.db, "Results database (default: $ASRH_DB, then asrh.db)");
  stats->add_option("--group-by", s.group_by, "category or engine")
      ->capture_default_str()
      ->check(CLI::IsMember({"category", "engine"}));
  stats->add_option("--format", s.format, "text or csv")->capture_default_str()->check(CLI::IsMember({"text", "csv"}));
  stats->add_option("--engine", s.engine, "Only this engine label");
  stats->add_option("--run", s.run, "Only this run id");

  AuditArgs au;
  auto* audit = app.add_subcommand("audit", "List entries whose captions look misused");
  audit->add_option("--db", au.db, "Results database (default: $ASRH_DB, then asrh.db)");
  audit->add_option("--threshold", au.threshold, "WER above which high_wer is reported")->capture_default_str();
  audit->add_option("--engine", au.engine, "Only this engine label");
  audit->add_option("--run", au.run, "Only this run id");

  std::vector<std::string> argv_storage = {"asrh"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(g, out, err);
    if (*run) return cmd_run(r, out, err);
    if (*stats) return cmd_stats(s, out, err);
    if (*audit) return cmd_audit(au, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitAborted;
  }
  return kExitUsage;
}

}  // namespace asrh::cli
