#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace asrh::metrics {

/// Ordered word tokens. Every token is non-empty and free of ASCII
/// whitespace; construction throws InvariantViolation otherwise.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

/// Counts from a minimal unit-cost alignment of hypothesis to reference.
///   substitutions + deletions + correct  == reference_length
///   substitutions + insertions + correct == hypothesis length
struct AlignmentCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;
  std::size_t correct = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
  std::size_t hypothesis_length() const noexcept { return substitutions + insertions + correct; }

  friend bool operator==(const AlignmentCounts&, const AlignmentCounts&) = default;
};

/// Errors per reference word. Non-negative, not bounded above.
class WerScore {
 public:
  explicit WerScore(double value);
  double value() const noexcept { return value_; }

  friend bool operator==(const WerScore&, const WerScore&) = default;

 private:
  double value_;
};

/// Splits on runs of ASCII whitespace.
TokenSequence tokenize(std::string_view text);

/// Minimal edit alignment with unit costs. Among alignments of minimal total
/// cost, the one with the most substitutions (equivalently the fewest
/// insertions and deletions) is reported, which makes S/D/I unique.
AlignmentCounts align(const TokenSequence& reference, const TokenSequence& hypothesis);

/// (S + D + I) / N. Throws Error{EmptyReference} when N == 0.
WerScore compute_wer(const AlignmentCounts& counts);

}  // namespace asrh::metrics
