#include "asrh/store.hpp"

#include <json.hpp>
#include <sqlite3.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "asrh/audit.hpp"
#include "asrh/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace asrh::store {
namespace {

constexpr const char* kSchema = R"SQL(
CREATE TABLE IF NOT EXISTS runs (
  run_id        TEXT PRIMARY KEY,
  plan_id       TEXT NOT NULL,
  engine_label  TEXT NOT NULL,
  started_at    TEXT NOT NULL,
  tool_version  TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS results (
  id                INTEGER PRIMARY KEY,
  run_id            TEXT NOT NULL,
  plan_id           TEXT NOT NULL,
  video_id          TEXT NOT NULL,
  category_name     TEXT NOT NULL,
  engine_label      TEXT NOT NULL,
  wer               REAL,
  substitutions     INTEGER,
  deletions         INTEGER,
  insertions        INTEGER,
  reference_length  INTEGER,
  runtime_ms        INTEGER NOT NULL,
  error_code        TEXT,
  error_message     TEXT,
  audit_flags       TEXT NOT NULL,
  created_at        TEXT NOT NULL,
  UNIQUE (run_id, video_id, engine_label)
);
)SQL";

[[noreturn]] void fail(sqlite3* db, int rc, const std::string& what) {
  const int primary = rc & 0xff;
  const std::string msg = what + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
  if (primary == SQLITE_CORRUPT || primary == SQLITE_NOTADB) throw Error(ErrorCode::StorageCorrupt, msg);
  if (primary == SQLITE_CANTOPEN || primary == SQLITE_READONLY || primary == SQLITE_FULL ||
      primary == SQLITE_IOERR || primary == SQLITE_PERM || primary == SQLITE_BUSY) {
    throw Error(ErrorCode::SinkUnavailable, msg);
  }
  throw Error(ErrorCode::StorageCorrupt, msg);
}

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    const int rc = sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr);
    if (rc != SQLITE_OK) fail(db, rc, "prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  void bind(int i, const std::string& v) { check(sqlite3_bind_text(stmt_, i, v.data(), int(v.size()), SQLITE_TRANSIENT)); }
  void bind(int i, std::int64_t v) { check(sqlite3_bind_int64(stmt_, i, v)); }
  void bind(int i, double v) { check(sqlite3_bind_double(stmt_, i, v)); }
  void bind_null(int i) { check(sqlite3_bind_null(stmt_, i)); }
  template <class T>
  void bind(int i, const std::optional<T>& v) {
    if (v) bind(i, *v);
    else bind_null(i);
  }

  /// True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, rc, "step");
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  bool is_null(int i) const { return sqlite3_column_type(stmt_, i) == SQLITE_NULL; }
  std::string text(int i) const {
    const auto* p = sqlite3_column_text(stmt_, i);
    return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, i)) : std::string();
  }
  std::int64_t int64(int i) const { return sqlite3_column_int64(stmt_, i); }
  double real(int i) const { return sqlite3_column_double(stmt_, i); }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(db_, rc, "bind");
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  const int rc = sqlite3_exec(db, sql, nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    const std::string msg = err ? err : sqlite3_errstr(rc);
    sqlite3_free(err);
    fail(db, rc, msg);
  }
}

json flags_to_json(const std::vector<plan::DiscrepancyFlag>& flags) {
  json a = json::array();
  for (const auto& f : flags) a.push_back({{"kind", plan::to_string(f.kind)}, {"score", f.score}, {"evidence", f.evidence}});
  return a;
}

std::vector<plan::DiscrepancyFlag> flags_from_json(const std::string& text) {
  std::vector<plan::DiscrepancyFlag> out;
  const json a = json::parse(text, nullptr, false);
  if (!a.is_array()) throw Error(ErrorCode::StorageCorrupt, "audit_flags column is not a JSON array");
  for (const auto& f : a) {
    const auto kind = plan::parse_flag_kind(f.value("kind", ""));
    if (!kind) throw Error(ErrorCode::StorageCorrupt, "unknown audit flag kind in database");
    out.push_back({*kind, f.value("score", 0.0), f.value("evidence", "")});
  }
  return out;
}

sqlite3* open_db(const fs::path& path, int flags) {
  sqlite3* db = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &db, flags, nullptr);
  if (rc != SQLITE_OK) {
    const std::string msg = path.string() + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
    sqlite3_close(db);
    if ((rc & 0xff) == SQLITE_CORRUPT || (rc & 0xff) == SQLITE_NOTADB) throw Error(ErrorCode::StorageCorrupt, msg);
    throw Error(ErrorCode::SinkUnavailable, msg);
  }
  sqlite3_busy_timeout(db, 5000);
  return db;
}

}  // namespace

void validate(const ResultRecord& r) {
  const std::string who = r.video_id + "/" + r.engine_label;
  if (r.run_id.empty() || r.video_id.empty() || r.engine_label.empty()) {
    throw Error(ErrorCode::InvariantViolation, "record key fields must be non-empty (" + who + ")");
  }
  if (r.wer.has_value() == r.error.has_value()) {
    throw Error(ErrorCode::InvariantViolation, who + ": exactly one of wer and error must be set");
  }
  if (r.wer) {
    if (!r.counts) throw Error(ErrorCode::InvariantViolation, who + ": wer without alignment counts");
    const auto& c = *r.counts;
    if (c.reference_length == 0 || c.substitutions + c.deletions + c.correct != c.reference_length) {
      throw Error(ErrorCode::InvariantViolation, who + ": alignment counts do not cover the reference");
    }
    const double expected = static_cast<double>(c.errors()) / static_cast<double>(c.reference_length);
    if (!(std::abs(*r.wer - expected) < 1e-12)) {
      throw Error(ErrorCode::InvariantViolation, who + ": wer disagrees with (S+D+I)/N");
    }
  }
}

ResultRecord to_record(const plan::VideoEntry& entry, const plan::TestOutcome& outcome, const std::string& run_id,
                       const std::string& plan_id, const std::string& created_at) {
  ResultRecord r;
  r.run_id = run_id;
  r.plan_id = plan_id;
  r.video_id = entry.video_id;
  r.category_name = entry.category_name;
  r.engine_label = outcome.engine_label;
  if (outcome.wer) r.wer = outcome.wer->value();
  r.counts = outcome.counts;
  r.runtime_ms = outcome.runtime_ms;
  r.error = outcome.error;
  r.audit_flags = outcome.audit_flags;
  r.created_at = created_at;
  return r;
}

ResultStore::ResultStore(sqlite3* db, fs::path path)
    : db_(db), path_(std::move(path)), write_mutex_(std::make_unique<std::mutex>()) {}

ResultStore::ResultStore(ResultStore&& o) noexcept
    : db_(std::exchange(o.db_, nullptr)), path_(std::move(o.path_)), write_mutex_(std::move(o.write_mutex_)) {}

ResultStore& ResultStore::operator=(ResultStore&& o) noexcept {
  if (this != &o) {
    sqlite3_close(db_);
    db_ = std::exchange(o.db_, nullptr);
    path_ = std::move(o.path_);
    write_mutex_ = std::move(o.write_mutex_);
  }
  return *this;
}

ResultStore::~ResultStore() { sqlite3_close(db_); }

ResultStore ResultStore::open(const fs::path& path) {
  sqlite3* db = open_db(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX);
  ResultStore store(db, path);
  exec(db, kSchema);
  return store;
}

ResultStore ResultStore::open_readonly(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::ConfigError, "database not found: " + path.string());
  sqlite3* db = open_db(path, SQLITE_OPEN_READONLY | SQLITE_OPEN_FULLMUTEX);
  ResultStore store(db, path);
  Statement probe(db, "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'results'");
  probe.step();
  if (probe.int64(0) == 0) throw Error(ErrorCode::StorageCorrupt, path.string() + ": no results table");
  return store;
}

void ResultStore::begin_run(const RunInfo& run) {
  std::lock_guard lock(*write_mutex_);
  Statement s(db_,
              "INSERT OR IGNORE INTO runs (run_id, plan_id, engine_label, started_at, tool_version) "
              "VALUES (?1, ?2, ?3, ?4, ?5)");
  s.bind(1, run.run_id);
  s.bind(2, run.plan_id);
  s.bind(3, run.engine_label);
  s.bind(4, run.started_at);
  s.bind(5, run.tool_version);
  s.step();
}

AppendReport ResultStore::append_results(const std::vector<ResultRecord>& records) {
  for (const auto& r : records) validate(r);
  std::lock_guard lock(*write_mutex_);
  AppendReport report;
  exec(db_, "BEGIN IMMEDIATE");
  try {
    Statement s(db_,
                "INSERT OR IGNORE INTO results (run_id, plan_id, video_id, category_name, engine_label, wer, "
                "substitutions, deletions, insertions, reference_length, runtime_ms, error_code, error_message, "
                "audit_flags, created_at) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15)");
    for (const auto& r : records) {
      s.bind(1, r.run_id);
      s.bind(2, r.plan_id);
      s.bind(3, r.video_id);
      s.bind(4, r.category_name);
      s.bind(5, r.engine_label);
      s.bind(6, r.wer);
      if (r.counts) {
        s.bind(7, static_cast<std::int64_t>(r.counts->substitutions));
        s.bind(8, static_cast<std::int64_t>(r.counts->deletions));
        s.bind(9, static_cast<std::int64_t>(r.counts->insertions));
        s.bind(10, static_cast<std::int64_t>(r.counts->reference_length));
      }
      s.bind(11, r.runtime_ms);
      if (r.error) {
        s.bind(12, std::string(to_string(r.error->code)));
        s.bind(13, r.error->message);
      }
      s.bind(14, flags_to_json(r.audit_flags).dump());
      s.bind(15, r.created_at);
      s.step();
      if (sqlite3_changes(db_) == 1) ++report.written;
      else ++report.duplicates;
      s.reset();
    }
    exec(db_, "COMMIT");
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
  return report;
}

std::vector<ResultRecord> ResultStore::query(const RecordFilter& filter) const {
  Statement s(db_,
              "SELECT run_id, plan_id, video_id, category_name, engine_label, wer, substitutions, deletions, "
              "insertions, reference_length, runtime_ms, error_code, error_message, audit_flags, created_at "
              "FROM results WHERE (?1 IS NULL OR engine_label = ?1) AND (?2 IS NULL OR run_id = ?2) ORDER BY id");
  s.bind(1, filter.engine_label);
  s.bind(2, filter.run_id);
  std::vector<ResultRecord> out;
  while (s.step()) {
    ResultRecord r;
    r.run_id = s.text(0);
    r.plan_id = s.text(1);
    r.video_id = s.text(2);
    r.category_name = s.text(3);
    r.engine_label = s.text(4);
    if (!s.is_null(5)) r.wer = s.real(5);
    if (!s.is_null(9)) {
      metrics::AlignmentCounts c;
      c.substitutions = static_cast<std::size_t>(s.int64(6));
      c.deletions = static_cast<std::size_t>(s.int64(7));
      c.insertions = static_cast<std::size_t>(s.int64(8));
      c.reference_length = static_cast<std::size_t>(s.int64(9));
      c.correct = c.reference_length - c.substitutions - c.deletions;
      r.counts = c;
    }
    r.runtime_ms = s.int64(10);
    if (!s.is_null(11)) {
      plan::OutcomeError e;
      if (!parse_error_code(s.text(11), e.code)) throw Error(ErrorCode::StorageCorrupt, "unknown error code in database");
      e.message = s.text(12);
      r.error = e;
    }
    r.audit_flags = flags_from_json(s.text(13));
    r.created_at = s.text(14);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StatsSummary> summarize(const std::vector<ResultRecord>& records, GroupBy group_by) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.wer) continue;
    groups[group_by == GroupBy::Category ? r.category_name : r.engine_label].push_back(*r.wer);
  }
  if (groups.empty()) throw Error(ErrorCode::EmptySelection, "no scored results match the selection");
  std::vector<StatsSummary> out;
  for (auto& [key, values] : groups) out.push_back(summarize_values(key, std::move(values)));
  return out;
}

std::vector<AuditRow> audit_report(const std::vector<ResultRecord>& records, double high_wer_threshold) {
  std::vector<AuditRow> rows;
  for (const auto& r : records) {
    AuditRow row{r, {}};
    for (const auto& f : r.audit_flags) {
      if (f.kind != plan::FlagKind::Normal && f.kind != plan::FlagKind::HighWer) row.flags.push_back(f);
    }
    if (r.wer) {
      if (auto hw = high_wer_flag(*r.wer, high_wer_threshold)) row.flags.push_back(*hw);
    }
    if (!row.flags.empty()) rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AuditRow& a, const AuditRow& b) {
    // unscored rows (empty references) sort last
    return a.record.wer.value_or(-1.0) > b.record.wer.value_or(-1.0);
  });
  return rows;
}

}  // namespace asrh::store
