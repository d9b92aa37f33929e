// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asrh/cli.hpp"
#include "asrh/metrics.hpp"
#include "asrh/normalizer.hpp"
#include "asrh/runner.hpp"
#include "asrh/stats.hpp"
#include "asrh/store.hpp"
#include "asrh/testplan.hpp"
#include "oracles.hpp"
#include "plan_gen.hpp"
#include "tmpdir.hpp"
#include "unicode_gen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace asrh;

namespace {

const fs::path kFixtures = fs::path(ASRH_SOURCE_DIR) / "fixtures";

/// Thrown by check() to end a criterion with a reason.
struct Failed {
  std::string why;
};

void check(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run_cli(args, o, e);
  if (out) *out = o.str();
  return code;
}

std::vector<std::string> run_args(const fs::path& dir, const fs::path& fixtures, const fs::path& plan,
                                  const fs::path& results) {
  return {"run",    "--plan",         plan.string(),    "--engine",  "mock",
          "--fixture-source", fixtures.string(), "--db", (dir / "results.db").string(),
          "-o",     results.string(), "--workdir",      (dir / "work").string(), "--fixed-clock"};
}

std::string alignment_exact() {
  std::mt19937 rng(2023);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto ref = test::random_tokens(rng, 0, 8, 3);
    const auto hyp = test::random_tokens(rng, 0, 8, 3);
    const auto c = metrics::align(metrics::TokenSequence(ref), metrics::TokenSequence(hyp));
    const auto oracle = test::brute_force_alignment(ref, hyp);
    check(c.errors() == oracle.edits, "edit count differs from exhaustive search at pair " + std::to_string(i));
    check(c.errors() == test::levenshtein(ref, hyp), "edit count differs from Levenshtein at pair " + std::to_string(i));
    check(c.substitutions == oracle.max_substitutions, "tie-break differs at pair " + std::to_string(i));
    check(c.reference_length == ref.size() && c.hypothesis_length() == hyp.size(), "lengths not conserved");
  }
  const double t = seconds_since(t0);
  check(t < 10.0, "took " + std::to_string(t) + " s");
  char buf[64];
  std::snprintf(buf, sizeof buf, "1000 pairs in %.2f s", t);
  return buf;
}

std::string wer_formula() {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto ref = test::random_tokens(rng, 1, 12, 4);
    const auto hyp = test::random_tokens(rng, 0, 30, 4);
    const auto c = metrics::align(metrics::TokenSequence(ref), metrics::TokenSequence(hyp));
    const double expected = static_cast<double>(c.substitutions + c.deletions + c.insertions) /
                            static_cast<double>(c.reference_length);
    check(std::fabs(metrics::compute_wer(c).value() - expected) < 1e-12, "wer disagrees with (S+D+I)/N");
  }
  const auto all_deleted = metrics::align(metrics::tokenize("one two three four"), metrics::tokenize(""));
  check(metrics::compute_wer(all_deleted).value() == 1.0, "all deletions is not 1.0");
  std::string long_hyp;
  for (int i = 0; i < 254; ++i) long_hyp += "w" + std::to_string(i) + " ";
  const auto over = metrics::align(metrics::tokenize("hello"), metrics::tokenize(long_hyp));
  check(std::fabs(metrics::compute_wer(over).value() - 254.0) < 1e-12, "1 vs 254 tokens is not 254.0");
  return "2000 random pairs, wer 1.0 and 254.0 edge cases";
}

std::string normalizer_properties() {
  std::mt19937 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const std::string x = i % 2 ? test::random_unicode(rng, 40) : test::random_ascii(rng, 40);
    const std::string once = normalizer::normalize(x);
    check(normalizer::normalize(once) == once, "not idempotent on input " + std::to_string(i));
    check(normalizer::normalize(test::simple_uppercase(x)) == once, "case-sensitive on input " + std::to_string(i));
  }
  const auto music = runner::score_pair("[Music]", "la la la", normalizer::default_rules());
  check(!music.outcome.wer && music.outcome.error && music.outcome.error->code == ErrorCode::EmptyReference,
        "bracket-only reference was scored");
  return "10000 strings; [Music] gives EmptyReference";
}

std::string stats_match_oracle() {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> size(1, 300);
  std::lognormal_distribution<double> wer(-1.5, 1.2);
  for (int d = 0; d < 100; ++d) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = wer(rng);
    const auto s = store::summarize_values("g", v);
    const auto o = test::reference_stats(v);
    check(s.count == o.count, "count");
    check(test::rel_close(s.min, o.min, 1e-9) && test::rel_close(s.max, o.max, 1e-9), "min/max");
    check(test::rel_close(s.mean, o.mean, 1e-9), "mean of dataset " + std::to_string(d));
    check(test::rel_close(s.median, o.median, 1e-9), "median of dataset " + std::to_string(d));
    check(test::rel_close(s.variance, o.variance, 1e-9), "variance of dataset " + std::to_string(d));
    check(test::rel_close(s.std_deviation, o.std_deviation, 1e-9), "std of dataset " + std::to_string(d));
    check(test::rel_close(s.variance, s.std_deviation * s.std_deviation, 1e-9), "variance != std^2");
  }
  return "100 datasets within 1e-9";
}

std::string plan_round_trip() {
  std::mt19937 rng(500);
  for (int i = 0; i < 500; ++i) {
    const auto p = test::random_plan(rng);
    const auto doc = plan::serialize_plan(p);
    const auto back = plan::parse_plan(doc);
    check(back == p, "plan " + std::to_string(i) + " changed in a round trip");
    check(plan::serialize_plan(back) == doc, "plan " + std::to_string(i) + " serialized differently");
  }
  auto p = test::random_plan(rng);
  for (auto& v : p.videos) v.outcome = test::random_outcome(rng);
  const auto results = plan::parse_plan(plan::serialize_plan(p));
  check(results.videos.size() == p.videos.size(), "results file lost entries");
  for (const auto& v : results.videos) check(v.outcome.has_value(), "results file lost an outcome");
  return "500 plans; results file parses as a plan";
}

/// Results of the offline end-to-end run, shared with the audit criterion.
plan::TestPlan g_results;

std::string offline_end_to_end() {
  test::TempDir dir;
  const auto t0 = std::chrono::steady_clock::now();
  const auto plan_path = dir / "plan.json";
  std::vector<std::string> gen = {"generate", "--fixture-source", kFixtures.string(), "--fixed-clock",
                                  "-o",       plan_path.string(),  "--count",          "10"};
  for (const auto& c : {"Autos & Vehicles", "Comedy", "Education", "Entertainment", "Film & Animation",
                        "Howto & Style", "Music", "News & Politics", "Nonprofits & Activism", "People & Blogs",
                        "Pets & Animals", "Science & Technology", "Travel & Events"}) {
    gen.push_back("--category");
    gen.push_back(c);
  }
  check(cli(gen) == 0, "generate failed");
  const auto first = dir / "first.json";
  const auto second = dir / "second.json";
  check(cli(run_args(dir.path(), kFixtures, plan_path, first)) == 0, "first run did not exit 0");
  check(cli(run_args(dir.path(), kFixtures, plan_path, second)) == 0, "second run did not exit 0");
  const auto doc = test::read_file(first);
  check(doc == test::read_file(second), "results files differ between runs");
  g_results = plan::parse_plan(doc);
  check(g_results.videos.size() == 124, "expected 124 videos");
  for (const auto& v : g_results.videos) {
    check(v.outcome && v.outcome->scored() && v.outcome->counts, v.video_id + " was not scored");
    const auto& c = *v.outcome->counts;
    const double expected = static_cast<double>(c.errors()) / static_cast<double>(c.reference_length);
    check(std::fabs(v.outcome->wer->value() - expected) < 1e-12, v.video_id + " wer disagrees with its counts");
  }

  const auto rows = store::ResultStore::open_readonly(dir / "results.db").query();
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) keys.insert({r.video_id, r.engine_label});
  check(rows.size() == 124 && keys.size() == 124, "expected one row per (video, engine)");

  std::string table;
  check(cli({"stats", "--db", (dir / "results.db").string(), "--group-by", "category", "--format", "csv"}, &table) == 0,
        "stats failed");
  const auto lines = std::count(table.begin(), table.end(), '\n');
  check(lines == 14, "expected 13 category rows, got " + std::to_string(lines - 1));
  std::string audit;
  check(cli({"audit", "--db", (dir / "results.db").string()}, &audit) == 0, "audit failed");

  const double t = seconds_since(t0);
  check(t < 30.0, "took " + std::to_string(t) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "124 videos, 13 groups, identical reruns, %.2f s", t);
  return buf;
}

bool has_flag(const plan::TestOutcome& o, plan::FlagKind k) {
  return std::any_of(o.audit_flags.begin(), o.audit_flags.end(), [&](const auto& f) { return f.kind == k; });
}

std::string audit_flags() {
  check(!g_results.videos.empty(), "end-to-end results unavailable");
  const plan::TestOutcome* seo = nullptr;
  const plan::TestOutcome* descriptive = nullptr;
  std::size_t normal = 0;
  for (const auto& v : g_results.videos) {
    const auto& o = *v.outcome;
    if (v.video_id == "JbioSJtMkwQ") seo = &o;
    if (v.video_id == "4Co4mDeCIJ4") descriptive = &o;
    if (o.audit_flags.size() == 1 && o.audit_flags[0].kind == plan::FlagKind::Normal) ++normal;
  }
  check(seo && has_flag(*seo, plan::FlagKind::LikelySeo), "keyword caption not flagged likely_seo");
  check(seo->wer->value() > 1.0, "keyword caption wer not above 1");
  check(descriptive && has_flag(*descriptive, plan::FlagKind::LikelyDescriptive),
        "sound caption not flagged likely_descriptive");
  check(descriptive->wer->value() > 1.0, "sound caption wer not above 1");
  check(normal >= 10, "fewer than 10 ordinary videos flagged normal");
  char buf[96];
  std::snprintf(buf, sizeof buf, "seo wer=%.2f, descriptive wer=%.2f, %zu normal", seo->wer->value(),
                descriptive->wer->value(), normal);
  return buf;
}

std::string partial_failure() {
  test::TempDir dir;
  const auto root = dir / "fixtures";
  auto p = plan::parse_plan(test::read_file(kFixtures / "plans" / "sample_124.json"));
  p.videos.resize(10);
  json mock = json::parse(test::read_file(kFixtures / "mock_transcripts.json"));
  fs::create_directories(root);
  for (const auto& v : p.videos) fs::copy(kFixtures / v.video_id, root / v.video_id, fs::copy_options::recursive);

  fs::remove(root / p.videos[2].video_id / "captions.json");
  mock[p.videos[5].video_id] = {{"error", "engine crashed"}};
  test::write_file(root / p.videos[8].video_id / "captions.json",
                   json{{"tracks", {{{"language", "en"},
                                     {"is_auto_generated", false},
                                     {"segments", {{{"start", 0}, {"duration", 3}, {"text", "[Music]"}}}}}}}}
                       .dump());
  test::write_file(root / "mock.json", mock.dump());
  test::write_file(root / "engines.json",
                   json::array({{{"label", "mock"}, {"kind", "mock"}, {"endpoint_or_command", "mock.json"}}}).dump());
  test::write_file(dir / "plan.json", plan::serialize_plan(p));

  const int code = cli(run_args(dir.path(), root, dir / "plan.json", dir / "results.json"));
  check(code == 2, "exit code " + std::to_string(code) + ", expected 2");
  const auto results = plan::parse_plan(test::read_file(dir / "results.json"));
  check(results.videos.size() == 10, "expected 10 outcomes");
  std::size_t scored = 0;
  for (const auto& v : results.videos) {
    check(v.outcome.has_value(), "missing outcome for " + v.video_id);
    if (v.outcome->scored()) ++scored;
  }
  check(scored == 7, "expected 7 scored, got " + std::to_string(scored));
  check(results.videos[2].outcome->error->code == ErrorCode::NoCaptions, "missing captions not reported");
  check(results.videos[5].outcome->error->code == ErrorCode::EngineFailure, "engine failure not reported");
  check(results.videos[8].outcome->error->code == ErrorCode::EmptyReference, "empty reference not reported");
  return "exit 2, 10 outcomes, 7 scored";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<std::string()>>> criteria = {
      {"alignment matches exhaustive search", alignment_exact},
      {"wer equals (S+D+I)/N", wer_formula},
      {"normalizer idempotent and case-invariant", normalizer_properties},
      {"summary statistics match oracle", stats_match_oracle},
      {"plan serialization round-trips", plan_round_trip},
      {"offline end-to-end run", offline_end_to_end},
      {"audit flags pathological references", audit_flags},
      {"failures are isolated per video", partial_failure},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, fn] = criteria[i];
    std::string detail;
    bool ok = false;
    try {
      detail = fn();
      ok = true;
    } catch (const Failed& f) {
      detail = f.why;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("%s %zu %s: %s\n", ok ? "PASS" : "FAIL", i + 1, name, detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
