#include "asrh/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "asrh/metrics.hpp"

namespace asrh::store {
namespace {

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double token_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

std::optional<plan::DiscrepancyFlag> high_wer_flag(double wer, double threshold) {
  if (!(wer > threshold)) return std::nullopt;
  const double score = threshold > 0 ? 1.0 - threshold / wer : 1.0;
  return plan::DiscrepancyFlag{plan::FlagKind::HighWer, clamp01(score), fmt("wer %.4g > %.4g", wer, threshold)};
}

std::vector<plan::DiscrepancyFlag> audit(const plan::TestOutcome& outcome, std::string_view raw_reference,
                                         std::string_view normalized_ref, std::string_view normalized_hyp,
                                         const AuditThresholds& t) {
  using plan::DiscrepancyFlag;
  using plan::FlagKind;
  if (outcome.error) {
    if (outcome.error->code == ErrorCode::EmptyReference) {
      return {{FlagKind::EmptyReference, 1.0, "reference has no words after normalization"}};
    }
    return {};
  }
  if (!outcome.wer) return {};

  const auto ref = metrics::tokenize(normalized_ref).tokens();
  const auto hyp = metrics::tokenize(normalized_hyp).tokens();
  const double n = static_cast<double>(ref.size());
  const double commas = static_cast<double>(std::count(raw_reference.begin(), raw_reference.end(), ','));
  const double density = n > 0 ? commas / n : 0.0;
  const double ttr = n > 0 ? static_cast<double>(std::set<std::string>(ref.begin(), ref.end()).size()) / n : 1.0;
  const double overlap = token_overlap(ref, hyp);
  const double ratio = hyp.empty() ? std::numeric_limits<double>::infinity() : n / static_cast<double>(hyp.size());

  std::vector<DiscrepancyFlag> flags;
  const bool seo = density > t.comma_density && ttr < t.type_token_ratio && overlap < t.overlap;
  if (seo) {
    const double score = (std::min(1.0, density) + (1.0 - ttr) + (1.0 - overlap)) / 3.0;
    flags.push_back({FlagKind::LikelySeo, clamp01(score),
                     fmt("comma density %.3f, type/token %.3f, overlap %.3f", density, ttr, overlap)});
  } else if (overlap < t.overlap && (ratio < t.min_length_ratio || ratio > t.max_length_ratio)) {
    const double extremity = std::max(ratio, 1.0 / ratio);
    const double score = (1.0 - overlap) * (1.0 - 1.0 / extremity);
    flags.push_back({FlagKind::LikelyDescriptive, clamp01(score),
                     fmt("overlap %.3f, ref/hyp length ratio %.3g", overlap, ratio)});
  }
  if (auto hw = high_wer_flag(outcome.wer->value(), t.high_wer)) flags.push_back(*hw);
  if (flags.empty()) flags.push_back({FlagKind::Normal, 0.0, ""});
  return flags;
}

}  // namespace asrh::store
