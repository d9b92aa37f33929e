#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "asrh/stats.hpp"
#include "asrh/testplan.hpp"

struct sqlite3;

namespace asrh::store {

struct ResultRecord {
  std::string run_id;
  std::string plan_id;
  std::string video_id;
  std::string category_name;
  std::string engine_label;
  std::optional<double> wer;
  std::optional<metrics::AlignmentCounts> counts;
  std::int64_t runtime_ms = 0;
  std::optional<plan::OutcomeError> error;
  std::vector<plan::DiscrepancyFlag> audit_flags;
  std::string created_at;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

/// Throws Error{InvariantViolation} unless exactly one of wer and error is
/// set and wer agrees with the counts to within 1e-12.
void validate(const ResultRecord& r);

ResultRecord to_record(const plan::VideoEntry& entry, const plan::TestOutcome& outcome, const std::string& run_id,
                       const std::string& plan_id, const std::string& created_at);

struct RunInfo {
  std::string run_id;
  std::string plan_id;
  std::string engine_label;
  std::string started_at;
  std::string tool_version;
};

struct AppendReport {
  std::size_t written = 0;
  std::size_t duplicates = 0;  // (run_id, video_id, engine_label) already stored
};

struct RecordFilter {
  std::optional<std::string> engine_label;
  std::optional<std::string> run_id;
};

enum class GroupBy { Category, Engine };

/// SQLite file with `runs` and `results` tables. One writer at a time;
/// each append is a single transaction.
class ResultStore {
 public:
  /// Creates the file and schema if needed. Throws Error{SinkUnavailable}
  /// when the file cannot be opened for writing and Error{StorageCorrupt}
  /// when it is not a usable database.
  static ResultStore open(const std::filesystem::path& path);
  /// Existing database only, read-only. Throws Error{ConfigError} when
  /// the file does not exist.
  static ResultStore open_readonly(const std::filesystem::path& path);

  ResultStore(ResultStore&&) noexcept;
  ResultStore& operator=(ResultStore&&) noexcept;
  ~ResultStore();

  void begin_run(const RunInfo& run);

  /// Validates the whole batch first; any invalid record rejects it.
  AppendReport append_results(const std::vector<ResultRecord>& records);

  std::vector<ResultRecord> query(const RecordFilter& filter = {}) const;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  ResultStore(sqlite3* db, std::filesystem::path path);

  sqlite3* db_ = nullptr;
  std::filesystem::path path_;
  std::unique_ptr<std::mutex> write_mutex_;
};

/// Per-group statistics over scored records, ordered by group key.
/// Throws Error{EmptySelection} when no scored record is present.
std::vector<StatsSummary> summarize(const std::vector<ResultRecord>& records, GroupBy group_by);

struct AuditRow {
  ResultRecord record;
  std::vector<plan::DiscrepancyFlag> flags;  // non-normal only
};

/// Entries with at least one non-normal flag, highest wer first. Stored
/// high_wer flags are recomputed against `high_wer_threshold`.
std::vector<AuditRow> audit_report(const std::vector<ResultRecord>& records, double high_wer_threshold);

}  // namespace asrh::store
