#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "asrh/error.hpp"
#include "asrh/normalizer.hpp"
#include "unicode_gen.hpp"

namespace asrh::normalizer {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no asrh::Error thrown";
  return ErrorCode::ConfigError;
}

TEST(NormalizeTest, Examples) {
  EXPECT_EQ(normalize("Hello, World!"), "hello world");
  EXPECT_EQ(normalize(""), "");
  EXPECT_EQ(normalize("[Music] I'm — I'm fine (laughs)"), "i am i am fine");
}

TEST(NormalizeTest, BracketsOfEveryKind) {
  EXPECT_EQ(normalize("a [x] b (y) c {z} d <i>e</i>"), "a b c d e");
  EXPECT_EQ(normalize("[Music]"), "");
  EXPECT_EQ(normalize("(nested (deep) span) kept"), "kept");
  // unmatched openers are plain punctuation
  EXPECT_EQ(normalize("left ( open"), "left open");
  EXPECT_EQ(normalize("close ] only"), "close only");
}

TEST(NormalizeTest, Contractions) {
  EXPECT_EQ(normalize("I won't go, they'll stay"), "i will not go they will stay");
  EXPECT_EQ(normalize("Don't you've we're"), "do not you have we are");
  EXPECT_EQ(normalize("It’s fine"), "it is fine");
  // possessive falls through to the apostrophe split
  EXPECT_EQ(normalize("the dog's bone"), "the dog s bone");
  EXPECT_EQ(normalize("'quoted' words"), "quoted words");
}

TEST(NormalizeTest, SpellingAndFillers) {
  EXPECT_EQ(normalize("My favourite COLOUR, um, is grey"), "my favorite color is gray");
  EXPECT_EQ(normalize("uh hmm mm"), "");
}

TEST(NormalizeTest, PunctuationAndWhitespace) {
  EXPECT_EQ(normalize("  a\t\tb \n\n c  "), "a b c");
  EXPECT_EQ(normalize("2-3 litters, 100g"), "2 3 litters 100g");
  EXPECT_EQ(normalize("café naïve Über"), "café naïve über");
  EXPECT_EQ(normalize("emoji \U0001F600 gone"), "emoji gone");
}

TEST(NormalizeTest, InvalidUtf8BecomesSeparator) {
  EXPECT_EQ(normalize(std::string("ab\xff" "cd")), "ab cd");
}

TEST(NormalizeTest, NumbersAreNotSpelledOut) {
  EXPECT_EQ(normalize("Season 2023 had 3 episodes"), "season 2023 had 3 episodes");
}

TEST(LoadRulesTest, DefaultRuleSetParses) {
  const auto& rules = default_rules();
  EXPECT_FALSE(rules.contraction_map().empty());
  EXPECT_FALSE(rules.spelling_map().empty());
  EXPECT_TRUE(rules.filler_words().count("uh"));
  EXPECT_EQ(rules.version().rfind("rules-", 0), 0u);
}

TEST(LoadRulesTest, ShippedFileMatchesCompiledDefault) {
  auto from_file = load_rules(std::filesystem::path(ASRH_SOURCE_DIR) / "data" / "english.rules");
  EXPECT_EQ(from_file.version(), default_rules().version());
  EXPECT_EQ(from_file.contraction_map(), default_rules().contraction_map());
}

TEST(LoadRulesTest, CyclesAreRejected) {
  EXPECT_EQ(code_of([] { parse_rules("spelling a b\nspelling b a\n"); }), ErrorCode::CyclicRules);
  EXPECT_EQ(code_of([] { parse_rules("spelling a a\n"); }), ErrorCode::CyclicRules);
  EXPECT_EQ(code_of([] { parse_rules("contraction gonna going gonna\n"); }), ErrorCode::CyclicRules);
  EXPECT_EQ(code_of([] { parse_rules("contraction x'y foo\nspelling foo x'y\n"); }), ErrorCode::MalformedRules);
}

TEST(LoadRulesTest, ChainsResolveFully) {
  auto rules = parse_rules("spelling a b\nspelling b c\n");
  EXPECT_EQ(normalize("a b c", rules), "c c c");
  EXPECT_EQ(normalize(normalize("a", rules), rules), "c");
}

TEST(LoadRulesTest, EmptyFileStillLowercasesAndStrips) {
  auto rules = parse_rules("");
  EXPECT_TRUE(rules.empty());
  EXPECT_EQ(normalize("Hello, World! Uh", rules), "hello world uh");
  EXPECT_EQ(normalize("I'm", rules), "i m");
}

TEST(LoadRulesTest, SyntaxErrors) {
  EXPECT_EQ(code_of([] { parse_rules("bogus x y\n"); }), ErrorCode::MalformedRules);
  EXPECT_EQ(code_of([] { parse_rules("spelling onlyone\n"); }), ErrorCode::MalformedRules);
  EXPECT_EQ(code_of([] { parse_rules("filler a b\n"); }), ErrorCode::MalformedRules);
  EXPECT_EQ(code_of([] { parse_rules("contraction -ll will\n"); }), ErrorCode::MalformedRules);
  EXPECT_EQ(code_of([] { parse_rules("spelling a b\nspelling a c\n"); }), ErrorCode::MalformedRules);
  EXPECT_EQ(code_of([] { load_rules("/nonexistent/rules"); }), ErrorCode::MalformedRules);
}

TEST(LoadRulesTest, CommentsAndBlankLines) {
  auto rules = parse_rules("# header\n\n  filler uh   # trailing\nspelling Colour color\n");
  EXPECT_EQ(rules.filler_words().size(), 1u);
  EXPECT_EQ(rules.spelling_map().at("colour"), "color");
}

TEST(LoadRulesTest, VersionTracksContent) {
  EXPECT_EQ(parse_rules("filler uh\n").version(), parse_rules("# c\nfiller uh").version());
  EXPECT_NE(parse_rules("filler uh\n").version(), parse_rules("filler um\n").version());
}

class NormalizeProperty : public ::testing::TestWithParam<bool> {};

TEST_P(NormalizeProperty, IdempotentCaseInvariantNoWhitespaceRuns) {
  std::mt19937 rng(GetParam() ? 17 : 23);
  for (int i = 0; i < 3000; ++i) {
    const std::string x = GetParam() ? test::random_unicode(rng, 40) : test::random_ascii(rng, 40);
    const std::string once = normalize(x);
    ASSERT_EQ(normalize(once), once) << "input: " << x;
    ASSERT_EQ(normalize(test::simple_uppercase(x)), once) << "input: " << x;
    ASSERT_EQ(once.find("  "), std::string::npos);
    ASSERT_EQ(once.find_first_of("\t\n\r"), std::string::npos);
    if (!once.empty()) {
      ASSERT_NE(once.front(), ' ');
      ASSERT_NE(once.back(), ' ');
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Alphabets, NormalizeProperty, ::testing::Values(false, true));

}  // namespace
}  // namespace asrh::normalizer
