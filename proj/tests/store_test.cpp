#include <gtest/gtest.h>

#include <random>

#include "asrh/audit.hpp"
#include "asrh/error.hpp"
#include "asrh/store.hpp"
#include "oracles.hpp"
#include "tmpdir.hpp"

namespace asrh::store {
namespace {

using plan::FlagKind;
using test::TempDir;

template <class F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no asrh::Error thrown";
  return ErrorCode::ConfigError;
}

TEST(StatsTest, SmallExamples) {
  auto s = summarize_values("g", {0.3, 0.1, 0.2});
  EXPECT_DOUBLE_EQ(s.mean, 0.2);
  EXPECT_DOUBLE_EQ(s.median, 0.2);
  EXPECT_DOUBLE_EQ(s.min, 0.1);
  EXPECT_DOUBLE_EQ(s.max, 0.3);
  EXPECT_DOUBLE_EQ(summarize_values("g", {0.1, 0.3}).median, 0.2);
  auto one = summarize_values("g", {0.7});
  EXPECT_EQ(one.std_deviation, 0.0);
  EXPECT_EQ(one.count, 1u);
  EXPECT_EQ(code_of([] { summarize_values("g", {}); }), ErrorCode::EmptySelection);
}

TEST(StatsTest, MatchesOracleOnRandomData) {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 1000);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> v(k == 0 ? 1000 : len(rng));
    for (auto& x : v) x = u(rng);
    const auto s = summarize_values("g", v);
    const auto o = test::reference_stats(v);
    EXPECT_TRUE(test::rel_close(s.min, o.min, 1e-9));
    EXPECT_TRUE(test::rel_close(s.max, o.max, 1e-9));
    EXPECT_TRUE(test::rel_close(s.mean, o.mean, 1e-9));
    EXPECT_TRUE(test::rel_close(s.median, o.median, 1e-9));
    EXPECT_TRUE(test::rel_close(s.std_deviation, o.std_deviation, 1e-9));
    EXPECT_TRUE(test::rel_close(s.variance, o.variance, 1e-9));
    EXPECT_TRUE(test::rel_close(s.variance, s.std_deviation * s.std_deviation, 1e-9));
    EXPECT_LE(s.min, s.median);
    EXPECT_LE(s.median, s.max);
  }
}

TEST(ExportTest, CsvAndText) {
  std::vector<StatsSummary> rows = {summarize_values("Comedy", {0.1, 0.3}), summarize_values("Music, live", {1.0 / 3})};
  const auto csv = export_table(rows, TableFormat::Csv);
  EXPECT_EQ(csv,
            "Min,Max,Mean,Std. deviation,Variance,Median,Group\r\n"
            "0.1,0.3,0.2,0.141421,0.02,0.2,Comedy\r\n"
            "0.333333,0.333333,0.333333,0,0,0.333333,\"Music, live\"\r\n");
  EXPECT_EQ(export_table(rows, TableFormat::Csv), csv);
  const auto text = export_table({rows[0]}, TableFormat::Text);
  EXPECT_EQ(text,
            "Min  Max  Mean  Std. deviation  Variance  Median  Group\n"
            "0.1  0.3   0.2        0.141421      0.02     0.2  Comedy\n");
}

plan::TestOutcome scored(double wer_num, std::size_t n) {
  plan::TestOutcome o;
  o.engine_label = "mock";
  o.counts = metrics::AlignmentCounts{static_cast<std::size_t>(wer_num), 0, 0, n, n - static_cast<std::size_t>(wer_num)};
  o.wer = metrics::compute_wer(*o.counts);
  return o;
}

TEST(AuditTest, OverlapIsJaccard) {
  EXPECT_DOUBLE_EQ(token_overlap({"a", "b", "b"}, {"b", "c"}), 1.0 / 3);
  EXPECT_DOUBLE_EQ(token_overlap({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(token_overlap({"a"}, {}), 0.0);
}

TEST(AuditTest, SeoKeywordList) {
  const std::string raw = "cats, kittens, cute cats, funny cats, cats, kittens, cat videos, cute kittens, cats";
  const std::string ref = "cats kittens cute cats funny cats cats kittens cat videos cute kittens cats";
  const std::string hyp = "hello everyone welcome back today we are going to look at something really "
                          "special that happened in my garden this morning so stay tuned";
  plan::TestOutcome o;
  o.engine_label = "mock";
  o.counts = metrics::align(metrics::tokenize(ref), metrics::tokenize(hyp));
  o.wer = metrics::compute_wer(*o.counts);
  ASSERT_GT(o.wer->value(), 1.0);
  auto flags = audit(o, raw, ref, hyp);
  ASSERT_EQ(flags.size(), 2u);
  EXPECT_EQ(flags[0].kind, FlagKind::LikelySeo);
  EXPECT_EQ(flags[1].kind, FlagKind::HighWer);
  for (const auto& f : flags) {
    EXPECT_GE(f.score, 0.0);
    EXPECT_LE(f.score, 1.0);
  }
}

TEST(AuditTest, DescriptiveNarration) {
  const std::string ref = "a dog barks at the door";
  std::string hyp;
  for (int i = 0; i < 40; ++i) hyp += "woof ";
  plan::TestOutcome o;
  o.engine_label = "mock";
  o.counts = metrics::align(metrics::tokenize(ref), metrics::tokenize(hyp));
  o.wer = metrics::compute_wer(*o.counts);
  auto flags = audit(o, ref, ref, hyp);
  EXPECT_EQ(flags.at(0).kind, FlagKind::LikelyDescriptive);
  EXPECT_EQ(flags.at(1).kind, FlagKind::HighWer);
  // score grows with the length disparity
  std::string longer = hyp + hyp;
  plan::TestOutcome o2 = o;
  o2.counts = metrics::align(metrics::tokenize(ref), metrics::tokenize(longer));
  o2.wer = metrics::compute_wer(*o2.counts);
  EXPECT_GT(audit(o2, ref, ref, longer).at(0).score, flags[0].score);
}

TEST(AuditTest, NormalEmptyAndErrors) {
  const auto ok = scored(1, 20);
  std::string ref = "the quick brown fox jumps over the lazy dog and then runs into the forest to find some food";
  auto flags = audit(ok, ref, ref, ref);
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].kind, FlagKind::Normal);
  EXPECT_EQ(flags[0].score, 0.0);

  plan::TestOutcome empty;
  empty.error = plan::OutcomeError{ErrorCode::EmptyReference, "x"};
  EXPECT_EQ(audit(empty, "[Music]", "", "la la").at(0).kind, FlagKind::EmptyReference);
  plan::TestOutcome failed;
  failed.error = plan::OutcomeError{ErrorCode::EngineFailure, "x"};
  EXPECT_TRUE(audit(failed, "a", "a", "").empty());

  AuditThresholds strict;
  strict.high_wer = 0.01;
  auto f2 = audit(ok, ref, ref, ref, strict);
  ASSERT_EQ(f2.size(), 1u);
  EXPECT_EQ(f2[0].kind, FlagKind::HighWer);
}

ResultRecord record(const std::string& id, const std::string& cat, std::optional<double> wer_errors, std::size_t n = 10,
                    const std::string& engine = "mock") {
  ResultRecord r;
  r.run_id = "run-1";
  r.plan_id = "plan-1";
  r.video_id = id;
  r.category_name = cat;
  r.engine_label = engine;
  r.created_at = "2000-01-01T00:00:00Z";
  if (wer_errors) {
    const auto e = static_cast<std::size_t>(*wer_errors);
    r.counts = metrics::AlignmentCounts{std::min(e, n), 0, e > n ? e - n : 0, n, n - std::min(e, n)};
    r.wer = metrics::compute_wer(*r.counts).value();
    r.audit_flags = {{FlagKind::Normal, 0.0, ""}};
  } else {
    r.error = plan::OutcomeError{ErrorCode::NoCaptions, "none"};
  }
  return r;
}

TEST(StoreTest, AppendDuplicatesAndQuery) {
  TempDir d;
  auto db = ResultStore::open(d / "r.db");
  db.begin_run({"run-1", "plan-1", "mock", "2000-01-01T00:00:00Z", "0.1.0"});
  std::vector<ResultRecord> batch;
  for (int i = 0; i < 124; ++i) batch.push_back(record("v" + std::to_string(i), i % 2 ? "Comedy" : "Music", i % 7));
  batch[5] = record("v5", "Music", std::nullopt);
  auto first = db.append_results(batch);
  EXPECT_EQ(first.written, 124u);
  EXPECT_EQ(first.duplicates, 0u);
  auto second = db.append_results(batch);
  EXPECT_EQ(second.written, 0u);
  EXPECT_EQ(second.duplicates, 124u);

  const auto back = db.query();
  ASSERT_EQ(back.size(), 124u);
  EXPECT_EQ(back, batch);
  EXPECT_EQ(db.query({std::string("other"), std::nullopt}).size(), 0u);

  auto ro = ResultStore::open_readonly(d / "r.db");
  EXPECT_EQ(ro.query().size(), 124u);
}

TEST(StoreTest, InconsistentRecordRejectsBatch) {
  TempDir d;
  auto db = ResultStore::open(d / "r.db");
  auto good = record("a", "Music", 1);
  auto bad = record("b", "Music", 1);
  bad.wer = 0.5;
  EXPECT_EQ(code_of([&] { db.append_results({good, bad}); }), ErrorCode::InvariantViolation);
  EXPECT_TRUE(db.query().empty());
  auto both = record("c", "Music", 1);
  both.error = plan::OutcomeError{ErrorCode::EngineFailure, ""};
  EXPECT_EQ(code_of([&] { db.append_results({both}); }), ErrorCode::InvariantViolation);
}

TEST(StoreTest, CorruptAndUnavailable) {
  TempDir d;
  test::write_file(d / "junk.db", std::string(4096, 'x'));
  EXPECT_EQ(code_of([&] { ResultStore::open(d / "junk.db"); }), ErrorCode::StorageCorrupt);
  EXPECT_EQ(code_of([&] { ResultStore::open(d / "no/such/dir/r.db"); }), ErrorCode::SinkUnavailable);
  EXPECT_EQ(code_of([&] { ResultStore::open_readonly(d / "absent.db"); }), ErrorCode::ConfigError);
}

TEST(SummarizeTest, GroupsSortedAndEmptySelection) {
  std::vector<ResultRecord> rs = {record("a", "Music", 1), record("b", "Comedy", 2), record("c", "Music", 3),
                                  record("d", "Autos & Vehicles", std::nullopt), record("e", "Comedy", 0, 10, "tiny")};
  auto by_cat = summarize(rs, GroupBy::Category);
  ASSERT_EQ(by_cat.size(), 2u);
  EXPECT_EQ(by_cat[0].group_key, "Comedy");
  EXPECT_EQ(by_cat[1].group_key, "Music");
  EXPECT_DOUBLE_EQ(by_cat[1].median, 0.2);
  auto by_engine = summarize(rs, GroupBy::Engine);
  ASSERT_EQ(by_engine.size(), 2u);
  EXPECT_EQ(by_engine[0].group_key, "mock");
  EXPECT_EQ(by_engine[0].count, 3u);
  EXPECT_EQ(code_of([] { summarize({}, GroupBy::Category); }), ErrorCode::EmptySelection);
  EXPECT_EQ(code_of([] { summarize({record("x", "M", std::nullopt)}, GroupBy::Category); }),
            ErrorCode::EmptySelection);
}

TEST(AuditReportTest, SortedByWerWithThreshold) {
  auto seo = record("seo", "Howto & Style", 25);
  seo.audit_flags = {{FlagKind::LikelySeo, 0.9, ""}, {FlagKind::HighWer, 0.6, ""}};
  auto mid = record("mid", "Music", 7);
  auto low = record("low", "Music", 1);
  auto empty = record("empty", "Music", std::nullopt);
  empty.error = plan::OutcomeError{ErrorCode::EmptyReference, ""};
  empty.audit_flags = {{FlagKind::EmptyReference, 1.0, ""}};
  const std::vector<ResultRecord> rs = {low, empty, mid, seo};

  auto rows = audit_report(rs, 1.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].record.video_id, "seo");
  EXPECT_EQ(rows[0].flags.size(), 2u);
  EXPECT_EQ(rows[1].record.video_id, "empty");

  auto half = audit_report(rs, 0.5);
  ASSERT_EQ(half.size(), 3u);
  EXPECT_EQ(half[1].record.video_id, "mid");
  EXPECT_EQ(half[1].flags.at(0).kind, FlagKind::HighWer);

  EXPECT_TRUE(audit_report({low}, 1.0).empty());
}

}  // namespace
}  // namespace asrh::store
