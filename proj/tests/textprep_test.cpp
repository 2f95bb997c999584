#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "culture/textprep.hpp"

using namespace culture;
using namespace culture::textprep;

namespace {

std::vector<std::pair<std::string, std::string>> porter_vocabulary() {
  std::ifstream voc(std::string(CULTURE_TEST_DATA_DIR) + "/porter/voc.txt");
  std::ifstream out(std::string(CULTURE_TEST_DATA_DIR) + "/porter/output.txt");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string w, s;
  while (std::getline(voc, w) && std::getline(out, s))
    if (!w.empty()) pairs.emplace_back(w, s);
  return pairs;
}

}  // namespace

TEST(SplitSentences, Basic) {
  EXPECT_EQ(split_sentences("Good pay. Bad hours.").size(), 2u);
  EXPECT_EQ(split_sentences("no punctuation").size(), 1u);
  std::string text = "a!? b";
  auto spans = split_sentences(text);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(text.substr(spans[0].begin, spans[0].size()), "a");
  EXPECT_EQ(text.substr(spans[1].begin, spans[1].size()), "b");
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_TRUE(split_sentences(" .\n\n!").empty());
}

TEST(SplitSentences, NewlineIsADelimiter) {
  EXPECT_EQ(split_sentences("pros here\n\ncons there").size(), 2u);
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("Great Teamwork!!"), (std::vector<std::string>{"great", "teamwork"}));
  EXPECT_EQ(tokenize("don't stop"), (std::vector<std::string>{"don't", "stop"}));
  EXPECT_EQ(tokenize("24/7 shifts"), (std::vector<std::string>{"shifts"}));
  EXPECT_EQ(tokenize("do n't"), (std::vector<std::string>{"do", "n't"}));
  EXPECT_EQ(tokenize("'quoted' words'"), (std::vector<std::string>{"quoted", "words"}));
  EXPECT_EQ(tokenize("can\xE2\x80\x99t"), (std::vector<std::string>{"can't"}));
}

TEST(Tokenize, SpansPointIntoSource) {
  std::string text = "Offers competitive compensation.";
  auto toks = tokenize_spans(text);
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(text.substr(toks[1].span.begin, toks[1].span.size()), "competitive");
}

TEST(Stem, Examples) {
  EXPECT_EQ(stem("create"), "creat");
  EXPECT_EQ(stem("creation"), "creat");
  EXPECT_EQ(stem("the"), "the");
  EXPECT_EQ(stem("connection"), "connect");
  EXPECT_EQ(stem("competitive"), "competit");
  EXPECT_EQ(stem("teamwork", StemmerKind::none), "teamwork");
}

TEST(Stem, StrictPorterLeavesCreationAlone) {
  EXPECT_EQ(porter::stem_strict("creation"), "creation");
  EXPECT_EQ(porter::stem_strict("create"), "creat");
}

TEST(Stem, ShortWordsUnchanged) {
  EXPECT_EQ(stem(""), "");
  EXPECT_EQ(stem("a"), "a");
  EXPECT_EQ(stem("as"), "as");
}

TEST(Stem, PublishedVocabulary) {
  auto pairs = porter_vocabulary();
  ASSERT_EQ(pairs.size(), 23531u);
  std::size_t strict_fail = 0;
  std::vector<std::string> compat_diffs;
  for (const auto& [w, s] : pairs) {
    if (porter::stem_strict(w) != s) ++strict_fail;
    if (stem(w) != s) compat_diffs.push_back(w);
  }
  EXPECT_EQ(strict_fail, 0u);
  // The only divergences are the pinned compatibility entries.
  for (const auto& w : compat_diffs) EXPECT_TRUE(porter::compat_overrides().count(w)) << w;
}

// Porter is not idempotent on its own output for every word (abuse -> abus -> abu).
// The set of non-fixpoints is frozen so any change in stemming behaviour shows up.
TEST(Stem, IdempotenceOnVocabulary) {
  std::size_t violations = 0;
  for (const auto& [w, s] : porter_vocabulary()) {
    auto once = stem(w);
    if (stem(once) != once) ++violations;
  }
  EXPECT_EQ(violations, 785u);
  EXPECT_EQ(stem(stem("connection")), stem("connection"));
  EXPECT_EQ(stem(stem("create")), "creat");
}

TEST(Negation, Examples) {
  PreprocessConfig cfg;
  EXPECT_TRUE(detect_negation(std::vector<std::string>{"not", "good"}, cfg));
  EXPECT_FALSE(detect_negation(std::vector<std::string>{"knot", "good"}, cfg));
  EXPECT_FALSE(detect_negation(std::vector<std::string>{}, cfg));
  EXPECT_TRUE(detect_negation(std::vector<std::string>{"never", "again"}, cfg));
}

TEST(Negation, MonotoneUnderAddedTokens) {
  PreprocessConfig cfg;
  std::mt19937 rng(3);
  const std::vector<std::string> pool = {"not", "good", "team", "never", "pay", "knot", "no", "none", "nice"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> toks;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) toks.push_back(pool[rng() % pool.size()]);
    bool before = detect_negation(toks, cfg);
    toks.insert(toks.begin() + static_cast<long>(rng() % (toks.size() + 1)), pool[rng() % pool.size()]);
    if (before) EXPECT_TRUE(detect_negation(toks, cfg));
  }
}

TEST(Stopwords, Examples) {
  PreprocessConfig cfg;
  EXPECT_EQ(remove_stopwords({"a", "team"}, cfg), (std::vector<std::string>{"team"}));
  EXPECT_TRUE(remove_stopwords({"and", "the"}, cfg).empty());
  EXPECT_EQ(remove_stopwords({"team", "team"}, cfg), (std::vector<std::string>{"team", "team"}));
  // Negation words are scope markers, never content.
  EXPECT_TRUE(remove_stopwords({"never", "without"}, cfg).empty());
}

TEST(Preprocess, MarksNegatedSentences) {
  PreprocessConfig cfg;
  auto s = preprocess("Great teamwork. We never collaborate!", cfg);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_FALSE(s[0].negated);
  EXPECT_EQ(s[0].tokens, (std::vector<std::string>{"great", "teamwork"}));
  EXPECT_TRUE(s[1].negated);
  EXPECT_EQ(s[1].tokens, (std::vector<std::string>{"collabor"}));
}

TEST(Preprocess, Deterministic) {
  PreprocessConfig cfg;
  std::string text = "Management doesn't listen. Teamwork is great!\nBenefits are good.";
  EXPECT_EQ(preprocess(text, cfg), preprocess(text, cfg));
}

TEST(Preprocess, PossessiveDropped) {
  PreprocessConfig cfg;
  auto s = preprocess("The team's spirit", cfg);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].tokens, (std::vector<std::string>{"team", "spirit"}));
}

TEST(WordList, LoadsOnePerLine) {
  auto path = testing::TempDir() + "/words.txt";
  {
    std::ofstream out(path);
    out << "# comment\nNot\n\nnever \r\n";
  }
  auto words = load_word_list(path);
  EXPECT_EQ(words, (WordSet{"never", "not"}));
  EXPECT_THROW(load_word_list(path + ".missing"), Error);
}
