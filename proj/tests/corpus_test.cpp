#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "culture/corpus.hpp"

using namespace culture;

namespace {

Corpus make_corpus(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledReview r;
    r.review.id = "r" + std::to_string(i);
    r.review.sections = {"pros " + std::to_string(i), "cons"};
    r.review.compose(0);
    r.labels = LabelSet{};
    c.push_back(r);
  }
  return c;
}

std::vector<std::string> segments(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    auto next = text.find("\n\n", pos);
    out.push_back(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + 2;
  }
  return out;
}

}  // namespace

TEST(ComposeText, Examples) {
  EXPECT_EQ(compose_text({"only section"}, 42), "only section");
  EXPECT_EQ(compose_text({}, 3), "");
  auto ab = compose_text({"A", "B"}, 7);
  EXPECT_TRUE(ab == "A\n\nB" || ab == "B\n\nA");
  for (int i = 0; i < 10; ++i) EXPECT_EQ(compose_text({"A", "B"}, 7), ab);
}

TEST(ComposeText, DropsBlankSections) {
  EXPECT_EQ(compose_text({"  ", "x", "\n\t"}, 1), "x");
}

TEST(ComposeText, DifferentSeedsReachBothOrders) {
  std::set<std::string> seen;
  for (int seed = 0; seed < 50; ++seed) seen.insert(compose_text({"A", "B"}, seed));
  EXPECT_EQ(seen.size(), 2u);
}

TEST(ComposeText, OutputIsAPermutation) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> sections;
    std::multiset<std::string> expected;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      std::string s = (rng() % 4 == 0) ? "   " : "s" + std::to_string(rng() % 5);
      sections.push_back(s);
      if (!is_blank(s)) expected.insert(s);
    }
    auto text = compose_text(sections, static_cast<std::int64_t>(rng()));
    std::multiset<std::string> got;
    if (!text.empty())
      for (auto& s : segments(text)) got.insert(s);
    EXPECT_EQ(got, expected);
  }
}

TEST(WordCount, Examples) {
  EXPECT_EQ(word_count(""), 0u);
  EXPECT_EQ(word_count("they are quick"), 3u);
  EXPECT_EQ(word_count("a  b\nc"), 3u);
  EXPECT_EQ(word_count("  lead and trail  "), 3u);
}

TEST(Ingest, JsonlSingleReview) {
  std::istringstream in(R"({"id":"a","sections":["x"]})" "\n");
  auto c = read_jsonl(in);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].review.composed_text, "x");
  EXPECT_EQ(c[0].review.word_count, 1u);
  EXPECT_FALSE(c[0].labels.has_value());
}

TEST(Ingest, JsonlWithLabels) {
  std::istringstream in(
      R"({"id":"a","sections":["x"],"labels":{"clan":1,"adhocracy":0,"market":-1,"hierarchy":0,"dominant":"market"}})");
  auto c = read_jsonl(in);
  ASSERT_TRUE(c[0].labels);
  EXPECT_EQ(c[0].labels->clan, TriLabel::positive);
  EXPECT_EQ(c[0].labels->market, TriLabel::negative);
  EXPECT_EQ(c[0].labels->dominant, Dimension::market);
}

TEST(Ingest, UnknownDominantReportsLine) {
  std::istringstream in(
      "{\"id\":\"a\",\"sections\":[\"x\"]}\n"
      R"({"id":"b","sections":["x"],"labels":{"clan":1,"adhocracy":0,"market":-1,"hierarchy":0,"dominant":"marketplace"}})");
  try {
    read_jsonl(in);
    FAIL();
  } catch (const Error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown dominant label"), std::string::npos) << msg;
  }
}

TEST(Ingest, MalformedAndDuplicate) {
  std::istringstream bad("{\"id\":\"a\",\"sections\":[\"x\"]}\n{not json\n");
  EXPECT_THROW(read_jsonl(bad), Error);
  std::istringstream dup("{\"id\":\"a\",\"sections\":[\"x\"]}\n{\"id\":\"a\",\"sections\":[\"y\"]}\n");
  EXPECT_THROW(read_jsonl(dup), Error);
  std::istringstream code(R"({"id":"a","sections":["x"],"labels":{"clan":2,"adhocracy":0,"market":0,"hierarchy":0,"dominant":"clan"}})");
  EXPECT_THROW(read_jsonl(code), Error);
}

TEST(Ingest, Csv) {
  std::istringstream in(
      "id,section_1,section_2,clan,adhocracy,market,hierarchy,dominant\n"
      "a,\"Great, team\",,1,0,0,-1,clan\n"
      "b,\"multi\nline\",second,0,0,1,0,market\n");
  auto c = read_csv(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].review.sections, (std::vector<std::string>{"Great, team"}));
  EXPECT_EQ(c[0].labels->hierarchy, TriLabel::negative);
  EXPECT_EQ(c[1].review.sections.size(), 2u);
  EXPECT_EQ(c[1].labels->dominant, Dimension::market);
}

TEST(Ingest, CsvWithoutLabels) {
  std::istringstream in("id,section_1\na,hello there\n");
  auto c = read_csv(in);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_FALSE(c[0].labels);
}

TEST(Ingest, CsvBadLabelReportsLine) {
  std::istringstream in(
      "id,section_1,clan,adhocracy,market,hierarchy,dominant\n"
      "a,x,1,0,0,0,clan\n"
      "b,y,1,0,0,0,marketplace\n");
  try {
    read_csv(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, WriteThenReadRoundTrip) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus c;
    int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      LabeledReview r;
      r.review.id = "id\"" + std::to_string(i);
      int k = static_cast<int>(rng() % 4);
      for (int s = 0; s < k; ++s) r.review.sections.push_back("text é " + std::to_string(rng() % 100) + "\nmore");
      r.review.compose(static_cast<std::int64_t>(rng()));
      if (rng() % 2) {
        LabelSet l;
        for (Task t : kTasks) {
          auto dom = label_domain(t);
          l.set(t, dom[rng() % dom.size()]);
        }
        r.labels = l;
      }
      c.push_back(r);
    }
    std::stringstream ss;
    write_jsonl(ss, c);
    EXPECT_EQ(read_jsonl(ss), c);
  }
}

TEST(Split, Partition) {
  auto c = make_corpus(10);
  auto s = split(c, {7, 1, 2}, 1);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 2u);
  EXPECT_TRUE(s.leftover.empty());
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 10u);
}

TEST(Split, TooLarge) {
  auto c = make_corpus(10);
  EXPECT_THROW(split(c, {9, 1, 1}, 0), Error);
}

TEST(Split, Deterministic) {
  auto c = make_corpus(30);
  auto a = split(c, {20, 5, 5}, 9);
  auto b = split(c, {20, 5, 5}, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  // Input order does not matter.
  std::reverse(c.begin(), c.end());
  auto r = split(c, {20, 5, 5}, 9);
  EXPECT_EQ(a.train, r.train);
}

TEST(Split, PropertyDisjointExactSizes) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng() % 40;
    auto c = make_corpus(n);
    std::size_t a = rng() % (n + 1), b = rng() % (n - a + 1), d = rng() % (n - a - b + 1);
    auto s = split(c, {a, b, d}, static_cast<std::int64_t>(rng()));
    EXPECT_EQ(s.train.size(), a);
    EXPECT_EQ(s.validation.size(), b);
    EXPECT_EQ(s.test.size(), d);
    EXPECT_EQ(s.leftover.size(), n - a - b - d);
    std::set<std::string> all;
    for (auto* v : {&s.train, &s.validation, &s.test, &s.leftover}) all.insert(v->begin(), v->end());
    EXPECT_EQ(all.size(), n);
  }
}

TEST(Split, DefaultSizes) {
  SplitSizes s;
  EXPECT_EQ(s.train, 1400u);
  EXPECT_EQ(s.validation, 200u);
  EXPECT_EQ(s.test, 400u);
}
