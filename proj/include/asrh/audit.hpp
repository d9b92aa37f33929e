#pragma once

#include <string_view>
#include <vector>

#include "asrh/testplan.hpp"

namespace asrh::store {

/// Defaults for the subtitle-misuse heuristics.
struct AuditThresholds {
  double comma_density = 0.2;     // commas in the raw reference per normalized token
  double type_token_ratio = 0.5;  // distinct / total normalized reference tokens
  double overlap = 0.1;           // Jaccard index of reference and hypothesis token sets
  double min_length_ratio = 0.2;  // reference tokens / hypothesis tokens
  double max_length_ratio = 5.0;
  double high_wer = 1.0;
};

/// Jaccard index of the two token sets; 1 when both are empty.
double token_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Flags for one outcome:
///   likely_seo          comma density, type/token ratio and overlap all past threshold
///   likely_descriptive  low overlap and a length ratio outside the band, when not likely_seo
///   high_wer            wer above threshold
///   empty_reference     the reference normalized to nothing
///   normal              none of the above
/// Outcomes carrying any other error get no flags.
std::vector<plan::DiscrepancyFlag> audit(const plan::TestOutcome& outcome, std::string_view raw_reference,
                                         std::string_view normalized_ref, std::string_view normalized_hyp,
                                         const AuditThresholds& thresholds = {});

/// The high_wer flag for `wer` under `threshold`, if it fires.
std::optional<plan::DiscrepancyFlag> high_wer_flag(double wer, double threshold);

}  // namespace asrh::store
