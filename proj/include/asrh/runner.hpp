#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "asrh/audit.hpp"
#include "asrh/clock.hpp"
#include "asrh/engine.hpp"
#include "asrh/normalizer.hpp"
#include "asrh/source.hpp"
#include "asrh/store.hpp"
#include "asrh/testplan.hpp"

namespace asrh::runner {

/// Scoring of one reference/hypothesis pair. `outcome` carries either wer,
/// counts and normalized_ref_words, or an EmptyReference error.
struct ScoredPair {
  plan::TestOutcome outcome;
  std::string normalized_reference;
  std::string normalized_hypothesis;
};

/// Both texts go through the same rule set; its version is recorded on
/// both halves of the outcome.
ScoredPair score_pair(std::string_view reference, std::string_view hypothesis,
                      const normalizer::NormalizationRuleSet& rules);

struct RetryPolicy {
  int retries = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubles after each attempt
};

/// Receives outcomes as they complete and the assembled results at the end.
/// Implementations throw Error{SinkUnavailable} to abort the run.
class ResultSink {
 public:
  virtual ~ResultSink() = default;
  virtual void begin(const plan::TestPlan& plan, const engine::EngineSpec& engine) = 0;
  virtual void record(const plan::VideoEntry& entry, const plan::TestOutcome& outcome) = 0;
  virtual void finish(const plan::TestPlan& results) = 0;
};

/// Appends each outcome to the database and writes the results JSON at the end.
class StoreSink final : public ResultSink {
 public:
  StoreSink(store::ResultStore& db, std::filesystem::path results_path, Clock& clock, std::string run_id);

  void begin(const plan::TestPlan& plan, const engine::EngineSpec& engine) override;
  void record(const plan::VideoEntry& entry, const plan::TestOutcome& outcome) override;
  void finish(const plan::TestPlan& results) override;

  const std::string& run_id() const noexcept { return run_id_; }
  std::size_t duplicates() const noexcept { return duplicates_; }

 private:
  store::ResultStore& db_;
  std::filesystem::path results_path_;
  Clock& clock_;
  std::string run_id_;
  std::string plan_id_;
  std::string started_at_;
  std::size_t duplicates_ = 0;
};

/// Writes `text` to `path` through a temporary file and rename.
/// Throws Error{SinkUnavailable}.
void write_file_atomically(const std::filesystem::path& path, const std::string& text);

struct RunOptions {
  std::size_t workers = 4;
  bool force = false;  // recompute entries that already hold a scored outcome
  RetryPolicy retry;
  store::AuditThresholds audit;
  std::filesystem::path workdir = "asrh-work";
  std::ostream* progress = nullptr;  // one line per completed entry
};

struct RunSummary {
  plan::TestPlan results;
  std::size_t scored = 0;
  std::size_t errored = 0;
  std::size_t reused = 0;  // kept from a previous run

  /// 0 when every entry is scored, 2 otherwise.
  int exit_code() const noexcept { return errored == 0 ? 0 : 2; }
};

/// Per entry: captions, then audio, then transcription, then scoring and
/// audit. Per-entry failures land in that entry's outcome; sink failures
/// and an empty plan abort with an exception.
RunSummary run_plan(const plan::TestPlan& plan, const engine::EngineSpec& spec, source::VideoSource& source,
                    engine::Transcriber& transcriber, ResultSink& sink, const normalizer::NormalizationRuleSet& rules,
                    Clock& clock, const RunOptions& options = {});

}  // namespace asrh::runner
