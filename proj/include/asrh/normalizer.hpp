#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asrh::normalizer {

/// Immutable rule table consulted by normalize().
///
/// Contraction patterns are either whole words ("won't") or suffixes written
/// with a leading '-' ("-'ll" turns "they'll" into "they will"). Whole-word
/// patterns always win over suffix patterns; suffix patterns are tried in
/// file order. Mappings are checked for cycles at load time, so expanding
/// them always terminates.
class NormalizationRuleSet {
 public:
  struct Contraction {
    std::string pattern;      // without the leading '-' for suffix rules
    std::string replacement;  // one or more words separated by single spaces
    bool suffix = false;

    friend bool operator==(const Contraction&, const Contraction&) = default;
  };

  NormalizationRuleSet();

  /// Content-derived identifier; equal rule tables have equal versions.
  const std::string& version() const noexcept { return version_; }
  const std::vector<Contraction>& contraction_map() const noexcept { return contractions_; }
  const std::map<std::string, std::string>& spelling_map() const noexcept { return spelling_; }
  const std::set<std::string>& filler_words() const noexcept { return fillers_; }

  bool empty() const noexcept {
    return contractions_.empty() && spelling_.empty() && fillers_.empty();
  }

 private:
  friend NormalizationRuleSet parse_rules(std::string_view, std::string_view);
  friend class RuleApplier;
  void finalize();

  std::string version_;
  std::vector<Contraction> contractions_;
  std::map<std::string, std::string> whole_words_;
  std::vector<std::pair<std::string, std::string>> suffixes_;
  std::map<std::string, std::string> spelling_;
  std::set<std::string> fillers_;
};

/// Parses rule-file text. `origin` only labels error messages.
/// Throws Error{MalformedRules} or Error{CyclicRules}.
NormalizationRuleSet parse_rules(std::string_view text, std::string_view origin = "<rules>");

/// Reads and parses a rule file.
NormalizationRuleSet load_rules(const std::filesystem::path& path);

/// The English rule table shipped in data/english.rules, compiled in.
const NormalizationRuleSet& default_rules();
std::string_view default_rules_text() noexcept;

/// Lowercase, drop bracketed spans, expand contractions, canonicalise
/// spellings, drop fillers, turn every non-alphanumeric character into a
/// space, collapse whitespace. Idempotent for any rule set.
std::string normalize(std::string_view raw, const NormalizationRuleSet& rules);
std::string normalize(std::string_view raw);

}  // namespace asrh::normalizer
