#include "asrh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "asrh/error.hpp"

namespace asrh::metrics {
namespace {

constexpr bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Lexicographic (edits, indels). Minimising indels second maximises
// substitutions among the minimal-edit alignments.
struct Cost {
  std::uint32_t edits = 0;
  std::uint32_t indels = 0;

  friend bool operator<(const Cost& a, const Cost& b) noexcept {
    return a.edits != b.edits ? a.edits < b.edits : a.indels < b.indels;
  }
};

Cost step(Cost c, bool indel) noexcept {
  ++c.edits;
  if (indel) ++c.indels;
  return c;
}

}  // namespace

TokenSequence::TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.empty() || std::any_of(t.begin(), t.end(), is_ascii_space)) {
      throw Error(ErrorCode::InvariantViolation, "token is empty or contains whitespace: '" + t + "'");
    }
  }
}

WerScore::WerScore(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvariantViolation, "WER must be a finite non-negative number");
  }
}

TokenSequence tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_ascii_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return TokenSequence(std::move(out));
}

AlignmentCounts align(const TokenSequence& reference, const TokenSequence& hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();

  // Intern tokens so the inner loop compares integers.
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto intern = [&ids](const std::string& s) {
    return ids.emplace(s, static_cast<std::uint32_t>(ids.size())).first->second;
  };
  std::vector<std::uint32_t> ref(n), hyp(m);
  for (std::size_t i = 0; i < n; ++i) ref[i] = intern(reference[i]);
  for (std::size_t j = 0; j < m; ++j) hyp[j] = intern(hypothesis[j]);

  // prev[j] = cost of aligning ref[0..i) with hyp[0..j)
  std::vector<Cost> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    prev[j] = {static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j)};
  }
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)};
    for (std::size_t j = 1; j <= m; ++j) {
      Cost diag = prev[j - 1];
      if (ref[i - 1] != hyp[j - 1]) diag = step(diag, false);
      Cost best = diag;
      best = std::min(best, step(prev[j], true));     // deletion
      best = std::min(best, step(cur[j - 1], true));  // insertion
      cur[j] = best;
    }
    std::swap(prev, cur);
  }

  const Cost total = prev[m];
  // D + I = indels and D - I = n - m determine the split uniquely.
  const auto indels = static_cast<std::int64_t>(total.indels);
  const auto diff = static_cast<std::int64_t>(n) - static_cast<std::int64_t>(m);

  AlignmentCounts counts;
  counts.deletions = static_cast<std::size_t>((indels + diff) / 2);
  counts.insertions = static_cast<std::size_t>((indels - diff) / 2);
  counts.substitutions = total.edits - total.indels;
  counts.reference_length = n;
  counts.correct = n - counts.substitutions - counts.deletions;
  return counts;
}

WerScore compute_wer(const AlignmentCounts& counts) {
  if (counts.reference_length == 0) {
    throw Error(ErrorCode::EmptyReference, "reference has no words after normalization");
  }
  return WerScore(static_cast<double>(counts.errors()) / static_cast<double>(counts.reference_length));
}

}  // namespace asrh::metrics
