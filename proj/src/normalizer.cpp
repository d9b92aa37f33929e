#include "asrh/normalizer.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "asrh/checksum.hpp"
#include "asrh/error.hpp"

namespace asrh::normalizer {
namespace {

#include "asrh_default_rules.inc"

constexpr UChar32 kApostrophe = U'\'';

UChar32 fold(UChar32 c) {
  switch (c) {
    case 0x2018:  // left single quotation mark
    case 0x2019:  // right single quotation mark
    case 0x02BC:  // modifier letter apostrophe
    case 0xFF07:  // fullwidth apostrophe
      return kApostrophe;
    default:
      // lower(upper(c)) so that c and its uppercase form land on the same
      // code point (e.g. dotless i, long s, Kelvin sign).
      return u_tolower(u_toupper(c));
  }
}

// Letters, combining marks and decimal digits; UCharCategory values 1..9.
bool is_word_char(UChar32 c) {
  const auto t = static_cast<int>(u_charType(c));
  return t >= U_UPPERCASE_LETTER && t <= U_DECIMAL_DIGIT_NUMBER;
}

std::u32string decode_folded(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) c = 0xFFFD;
    out.push_back(static_cast<char32_t>(fold(c)));
  }
  return out;
}

void append_utf8(std::string& out, char32_t c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool err = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), err);
  if (!err) out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

bool is_opener(char32_t c, char32_t& closer) {
  switch (c) {
    case U'[': closer = U']'; return true;
    case U'(': closer = U')'; return true;
    case U'{': closer = U'}'; return true;
    case U'<': closer = U'>'; return true;
    default: return false;
  }
}

// Replaces every balanced [..] (..) {..} <..> span with one space. An opener
// without a matching closer is left for punctuation stripping.
std::u32string drop_bracketed(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    char32_t closer;
    if (is_opener(in[i], closer)) {
      const char32_t opener = in[i];
      int depth = 0;
      std::size_t k = i;
      for (; k < in.size(); ++k) {
        if (in[k] == opener) ++depth;
        else if (in[k] == closer && --depth == 0) break;
      }
      if (k < in.size()) {
        out.push_back(U' ');
        i = k;
        continue;
      }
    }
    out.push_back(in[i]);
  }
  return out;
}

// Word tokens: runs of word characters, joined by apostrophes that sit
// between two word characters.
std::vector<std::string> word_tokens(const std::u32string& s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    const bool keep =
        is_word_char(static_cast<UChar32>(c)) ||
        (c == kApostrophe && i > 0 && i + 1 < s.size() && is_word_char(static_cast<UChar32>(s[i - 1])) &&
         is_word_char(static_cast<UChar32>(s[i + 1])));
    if (keep) {
      append_utf8(cur, c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string fold_utf8(std::string_view s) {
  std::string out;
  for (char32_t c : decode_folded(s)) append_utf8(out, c);
  return out;
}

bool all_word_chars(std::string_view s, bool allow_apostrophe) {
  const auto cps = decode_folded(s);
  if (cps.empty()) return false;
  for (char32_t c : cps) {
    if (c == kApostrophe && allow_apostrophe) continue;
    if (!is_word_char(static_cast<UChar32>(c))) return false;
  }
  return true;
}

[[noreturn]] void malformed(std::string_view origin, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedRules,
              std::string(origin) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

class RuleApplier {
 public:
  explicit RuleApplier(const NormalizationRuleSet& rules) : rules_(rules) {}

  void process(const std::string& word, std::vector<std::string>& out) const {
    if (auto it = rules_.whole_words_.find(word); it != rules_.whole_words_.end()) {
      for (const auto& w : split_ws(it->second)) process(w, out);
      return;
    }
    if (word.find('\'') != std::string::npos) {
      for (const auto& [suffix, replacement] : rules_.suffixes_) {
        if (word.size() > suffix.size() && word.ends_with(suffix)) {
          std::string stem = word.substr(0, word.size() - suffix.size());
          // the stem must end in a word character to count as a contraction
          if (stem.back() == '\'') continue;
          process(stem, out);
          for (const auto& w : split_ws(replacement)) process(w, out);
          return;
        }
      }
      std::size_t start = 0;
      while (start <= word.size()) {
        const std::size_t pos = word.find('\'', start);
        const std::string piece = word.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        if (!piece.empty()) process(piece, out);
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      return;
    }
    if (auto it = rules_.spelling_.find(word); it != rules_.spelling_.end()) {
      process(it->second, out);
      return;
    }
    if (rules_.fillers_.count(word) != 0) return;
    out.push_back(word);
  }

 private:
  const NormalizationRuleSet& rules_;
};

NormalizationRuleSet::NormalizationRuleSet() { finalize(); }

void NormalizationRuleSet::finalize() {
  whole_words_.clear();
  suffixes_.clear();
  std::string canonical;
  for (const auto& c : contractions_) {
    if (c.suffix) suffixes_.emplace_back(c.pattern, c.replacement);
    else whole_words_.emplace(c.pattern, c.replacement);
    canonical += (c.suffix ? "suffix\t" : "contraction\t") + c.pattern + "\t" + c.replacement + "\n";
  }
  for (const auto& [v, c] : spelling_) canonical += "spelling\t" + v + "\t" + c + "\n";
  for (const auto& f : fillers_) canonical += "filler\t" + f + "\n";
  version_ = "rules-" + sha256_hex(canonical).substr(0, 16);
}

NormalizationRuleSet parse_rules(std::string_view text, std::string_view origin) {
  NormalizationRuleSet rules;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen_patterns;

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto words = split_ws(line);
    if (words.empty()) continue;
    const std::string directive = words[0];

    if (directive == "contraction") {
      if (words.size() < 3) malformed(origin, lineno, "contraction needs a pattern and a replacement");
      std::string pattern = fold_utf8(words[1]);
      bool suffix = false;
      if (pattern.starts_with('-')) {
        suffix = true;
        pattern.erase(0, 1);
        if (pattern.find('\'') == std::string::npos) {
          malformed(origin, lineno, "suffix pattern must contain an apostrophe");
        }
      }
      if (!all_word_chars(pattern, true)) malformed(origin, lineno, "invalid contraction pattern '" + words[1] + "'");
      std::string replacement;
      for (std::size_t i = 2; i < words.size(); ++i) {
        const std::string w = fold_utf8(words[i]);
        if (!all_word_chars(w, false)) malformed(origin, lineno, "invalid replacement word '" + words[i] + "'");
        if (!replacement.empty()) replacement += ' ';
        replacement += w;
      }
      const std::string key = (suffix ? "-" : "") + pattern;
      if (!seen_patterns.insert(key).second) malformed(origin, lineno, "duplicate contraction '" + words[1] + "'");
      rules.contractions_.push_back({pattern, replacement, suffix});
    } else if (directive == "spelling") {
      if (words.size() != 3) malformed(origin, lineno, "spelling needs exactly a variant and a canonical form");
      const std::string variant = fold_utf8(words[1]);
      const std::string canonical = fold_utf8(words[2]);
      if (!all_word_chars(variant, false) || !all_word_chars(canonical, false)) {
        malformed(origin, lineno, "spelling entries must be single words");
      }
      auto [it, inserted] = rules.spelling_.emplace(variant, canonical);
      if (!inserted && it->second != canonical) {
        malformed(origin, lineno, "conflicting spelling for '" + variant + "'");
      }
    } else if (directive == "filler") {
      if (words.size() != 2) malformed(origin, lineno, "filler takes exactly one word");
      const std::string w = fold_utf8(words[1]);
      if (!all_word_chars(w, false)) malformed(origin, lineno, "invalid filler '" + words[1] + "'");
      rules.fillers_.insert(w);
    } else {
      malformed(origin, lineno, "unknown directive '" + directive + "'");
    }
  }

  // Cycle check over word -> replacement-word edges.
  std::map<std::string, std::vector<std::string>> edges;
  for (const auto& c : rules.contractions_) {
    if (!c.suffix) edges[c.pattern] = split_ws(c.replacement);
  }
  for (const auto& [v, c] : rules.spelling_) edges[v].push_back(c);

  enum class Mark { Visiting, Done };
  std::map<std::string, Mark> marks;
  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    auto it = edges.find(node);
    if (it == edges.end()) return;
    if (auto m = marks.find(node); m != marks.end()) {
      if (m->second == Mark::Visiting) {
        throw Error(ErrorCode::CyclicRules, std::string(origin) + ": replacement cycle through '" + node + "'");
      }
      return;
    }
    marks[node] = Mark::Visiting;
    for (const auto& next : it->second) visit(next);
    marks[node] = Mark::Done;
  };
  for (const auto& [node, _] : edges) visit(node);

  rules.finalize();
  return rules;
}

NormalizationRuleSet load_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedRules, "cannot read rule file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str(), path.string());
}

std::string_view default_rules_text() noexcept { return kDefaultRules; }

const NormalizationRuleSet& default_rules() {
  static const NormalizationRuleSet rules = parse_rules(kDefaultRules, "english.rules");
  return rules;
}

std::string normalize(std::string_view raw, const NormalizationRuleSet& rules) {
  const std::u32string folded = decode_folded(raw);
  const std::u32string unbracketed = drop_bracketed(folded);

  RuleApplier applier(rules);
  std::vector<std::string> words;
  for (const auto& token : word_tokens(unbracketed)) applier.process(token, words);

  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string normalize(std::string_view raw) { return normalize(raw, default_rules()); }

}  // namespace asrh::normalizer
