#include "asrh/runner.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "asrh/error.hpp"

namespace fs = std::filesystem;

namespace asrh::runner {
namespace {

bool retryable(ErrorCode c) { return c == ErrorCode::NetworkError || c == ErrorCode::DownloadFailed; }

template <class F>
auto with_retries(const RetryPolicy& policy, F&& op) {
  auto backoff = policy.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return op();
    } catch (const Error& e) {
      if (!retryable(e.code()) || attempt >= policy.retries) throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

std::string progress_line(std::size_t done, std::size_t total, const plan::VideoEntry& e, const plan::TestOutcome& o) {
  char head[48];
  const int width = static_cast<int>(std::to_string(total).size());
  std::snprintf(head, sizeof head, "[%*zu/%zu] ", width, done, total);
  std::string line = head + e.video_id + " ";
  if (o.wer) {
    char wer[32];
    std::snprintf(wer, sizeof wer, "wer=%.4f", o.wer->value());
    line += wer;
  } else if (o.error) {
    line += "error=" + std::string(to_string(o.error->code));
  }
  for (const auto& f : o.audit_flags) {
    if (f.kind != plan::FlagKind::Normal) line += " " + std::string(plan::to_string(f.kind));
  }
  return line + "\n";
}

}  // namespace

ScoredPair score_pair(std::string_view reference, std::string_view hypothesis,
                      const normalizer::NormalizationRuleSet& rules) {
  ScoredPair p;
  p.outcome.reference_rules_version = rules.version();
  p.outcome.hypothesis_rules_version = rules.version();
  p.normalized_reference = normalizer::normalize(reference, rules);
  p.normalized_hypothesis = normalizer::normalize(hypothesis, rules);
  const auto ref = metrics::tokenize(p.normalized_reference);
  const auto hyp = metrics::tokenize(p.normalized_hypothesis);
  p.outcome.normalized_ref_words = ref.size();
  try {
    auto counts = metrics::align(ref, hyp);
    p.outcome.wer = metrics::compute_wer(counts);
    p.outcome.counts = counts;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyReference) throw;
    p.outcome.error = plan::OutcomeError{e.code(), "reference transcript is empty after normalization"};
  }
  return p;
}

void write_file_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::SinkUnavailable, "cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::SinkUnavailable, "short write to " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::SinkUnavailable, "cannot replace " + path.string() + ": " + ec.message());
}

StoreSink::StoreSink(store::ResultStore& db, fs::path results_path, Clock& clock, std::string run_id)
    : db_(db), results_path_(std::move(results_path)), clock_(clock), run_id_(std::move(run_id)) {}

void StoreSink::begin(const plan::TestPlan& plan, const engine::EngineSpec& engine) {
  if (!results_path_.empty()) {
    // fail before any work when the results file cannot be written
    const fs::path probe = results_path_.string() + ".tmp";
    std::ofstream out(probe, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::SinkUnavailable, "cannot write " + results_path_.string());
    out.close();
    std::error_code ec;
    fs::remove(probe, ec);
  }
  plan_id_ = plan.plan_id;
  started_at_ = clock_.now_rfc3339();
  try {
    db_.begin_run({run_id_, plan_id_, engine.label, started_at_, ASRH_VERSION});
  } catch (const Error& e) {
    throw Error(ErrorCode::SinkUnavailable, e.what());
  }
}

void StoreSink::record(const plan::VideoEntry& entry, const plan::TestOutcome& outcome) {
  const auto rec = store::to_record(entry, outcome, run_id_, plan_id_, clock_.now_rfc3339());
  try {
    duplicates_ += db_.append_results({rec}).duplicates;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvariantViolation) throw;
    throw Error(ErrorCode::SinkUnavailable, e.what());
  }
}

void StoreSink::finish(const plan::TestPlan& results) {
  if (!results_path_.empty()) write_file_atomically(results_path_, plan::serialize_plan(results));
}

RunSummary run_plan(const plan::TestPlan& plan, const engine::EngineSpec& spec, source::VideoSource& source,
                    engine::Transcriber& transcriber, ResultSink& sink, const normalizer::NormalizationRuleSet& rules,
                    Clock& clock, const RunOptions& options) {
  if (plan.videos.empty()) throw Error(ErrorCode::EmptyPlan, "plan '" + plan.plan_id + "' has no videos");
  plan::validate_plan(plan);
  engine::validate(spec);

  RunSummary summary;
  summary.results = plan;
  summary.results.engine_label = spec.label;
  auto& videos = summary.results.videos;
  const std::size_t total = videos.size();

  sink.begin(plan, spec);

  const std::string fallback_language = plan.filters.empty() ? "en" : plan.filters.front().language;
  auto process = [&](const plan::VideoEntry& entry) {
    plan::TestOutcome outcome;
    outcome.engine_label = spec.label;
    outcome.reference_rules_version = rules.version();
    outcome.hypothesis_rules_version = rules.version();
    const auto start = clock.monotonic_ms();
    std::string raw_reference;
    try {
      const std::string language =
          entry.caption_track.language.empty() ? fallback_language : entry.caption_track.language;
      const auto track = with_retries(options.retry, [&] { return source.fetch_captions(entry.video_id, language); });
      raw_reference = source::flatten_transcript(track);
      // an empty reference cannot be scored, so skip the download
      if (metrics::tokenize(normalizer::normalize(raw_reference, rules)).empty()) {
        outcome.error = plan::OutcomeError{ErrorCode::EmptyReference, "reference transcript is empty after normalization"};
      } else {
        const auto audio =
            with_retries(options.retry, [&] { return source.acquire_audio(entry.video_id, options.workdir); });
        const auto hyp = transcriber.transcribe(spec, audio);
        auto scored = score_pair(raw_reference, hyp.text, rules);
        outcome.wer = scored.outcome.wer;
        outcome.counts = scored.outcome.counts;
        outcome.normalized_ref_words = scored.outcome.normalized_ref_words;
        outcome.error = scored.outcome.error;
        outcome.warnings = hyp.warnings;
        outcome.audit_flags =
            store::audit(outcome, raw_reference, scored.normalized_reference, scored.normalized_hypothesis, options.audit);
      }
    } catch (const Error& e) {
      outcome = plan::TestOutcome{{}, {}, spec.label, 0, 0, plan::OutcomeError{e.code(), e.what()}, {},
                                  rules.version(), rules.version(), {}, plan::Extra::object()};
    }
    if (outcome.error && outcome.error->code == ErrorCode::EmptyReference) {
      outcome.audit_flags = store::audit(outcome, raw_reference, "", "", options.audit);
    }
    outcome.runtime_ms = std::max<std::int64_t>(0, clock.monotonic_ms() - start);
    return outcome;
  };

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& o = videos[i].outcome;
    if (!options.force && o && o->scored() && o->engine_label == spec.label) {
      ++summary.reused;
    } else {
      pending.push_back(i);
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::mutex done_mutex;
  std::size_t done = summary.reused;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      if (aborted.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      auto& entry = videos[pending[k]];
      plan::VideoEntry snapshot = entry;
      snapshot.outcome.reset();
      plan::TestOutcome outcome;
      try {
        outcome = process(snapshot);
        sink.record(snapshot, outcome);
      } catch (...) {
        std::lock_guard lock(done_mutex);
        if (!failure) failure = std::current_exception();
        aborted = true;
        return;
      }
      std::lock_guard lock(done_mutex);
      entry.outcome = std::move(outcome);
      ++done;
      if (options.progress) *options.progress << progress_line(done, total, entry, *entry.outcome) << std::flush;
    }
  };

  const std::size_t nthreads = std::max<std::size_t>(1, std::min(options.workers, pending.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < nthreads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  for (const auto& v : videos) {
    if (v.outcome && v.outcome->scored()) ++summary.scored;
    else ++summary.errored;
  }
  plan::validate_plan(summary.results);
  sink.finish(summary.results);
  return summary;
}

}  // namespace asrh::runner
