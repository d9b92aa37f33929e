#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

namespace asrh {

/// Source of timestamps, durations and identifiers. The fixed variant makes
/// whole runs byte-reproducible.
class Clock {
 public:
  virtual ~Clock() = default;

  /// Wall-clock time as RFC 3339 UTC, second precision.
  virtual std::string now_rfc3339() = 0;
  /// Monotonic milliseconds, only meaningful as differences.
  virtual std::int64_t monotonic_ms() = 0;
  /// Fresh identifier such as "plan-3f9a0c1d2e4b5a69".
  virtual std::string new_id(const std::string& prefix) = 0;
};

class SystemClock final : public Clock {
 public:
  std::string now_rfc3339() override;
  std::int64_t monotonic_ms() override;
  std::string new_id(const std::string& prefix) override;
};

/// Constant time, zero durations, sequential ids ("plan-000001", ...).
class FixedClock final : public Clock {
 public:
  explicit FixedClock(std::string timestamp = "2000-01-01T00:00:00Z") : timestamp_(std::move(timestamp)) {}

  std::string now_rfc3339() override { return timestamp_; }
  std::int64_t monotonic_ms() override { return 0; }
  std::string new_id(const std::string& prefix) override;

 private:
  std::string timestamp_;
  std::atomic<std::uint64_t> counter_{0};
};

/// Accepts "YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)".
bool is_rfc3339(const std::string& s);

}  // namespace asrh
