#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "culture/lexicon.hpp"
#include "culture/wordnet.hpp"

using namespace culture;
using namespace culture::lexicon;
namespace fs = std::filesystem;

namespace {

const fs::path kMini = fs::path(CULTURE_DATA_DIR) / "wordnet-mini";

const wordnet::Lexicon& mini() {
  static const wordnet::Lexicon lex = wordnet::parse_wordnet(kMini);
  return lex;
}

fs::path fresh_dir(const std::string& name) {
  auto p = fs::path(testing::TempDir()) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pad8(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08zu", n);
  return buf;
}

// A two-synset noun database: "canine" with hyponym "pup". Optional hooks
// corrupt the hyponym pointer or the second record's offset.
fs::path tiny_wordnet(const std::string& name, const std::string& bad_target = "", bool bad_offset = false) {
  auto dir = fresh_dir(name);
  std::string header = "  1 license line  \n";
  std::string first_rest = " 05 n 01 canine 0 001 ~ TARGET n 0000 | a dog  \n";
  std::size_t off1 = header.size();
  std::size_t off2 = off1 + 8 + first_rest.size() + 2;
  std::string target = bad_target.empty() ? pad8(off2) : bad_target;
  auto rest = first_rest;
  rest.replace(rest.find("TARGET"), 6, target);
  std::string data = header + pad8(off1) + rest;
  data += (bad_offset ? pad8(off2 + 1) : pad8(off2)) + " 05 n 01 pup 0 000 | young dog  \n";
  write(dir / "data.noun", data);
  write(dir / "index.noun", header + "canine n 1 1 ~ 1 0 " + pad8(off1) + "  \npup n 1 0 1 0 " + pad8(off2) + "  \n");
  for (auto pos : {"verb", "adj", "adv"}) {
    write(dir / (std::string("data.") + pos), header);
    write(dir / (std::string("index.") + pos), header);
  }
  return dir;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Wordnet, AbsentLemmaHasNoSenses) {
  EXPECT_TRUE(mini().senses("qwertyuiop").empty());
}

TEST(Wordnet, LookupIsCaseInsensitiveWithSpacesAsUnderscores) {
  EXPECT_FALSE(mini().senses("dog").empty());
  EXPECT_EQ(mini().senses("DOG"), mini().senses("dog"));
  EXPECT_EQ(mini().senses("bear market"), mini().senses("bear_market"));
  EXPECT_FALSE(mini().senses("Bear Market").empty());
}

TEST(Wordnet, MemberLemmasIncludeIndexingLemma) {
  std::size_t checked = 0;
  for (auto pos : wordnet::kPos)
    for (const auto& [lemma, ids] : mini().index(pos))
      for (auto id : ids) {
        const auto* syn = mini().synset(id);
        ASSERT_NE(syn, nullptr);
        bool found = false;
        for (const auto& l : syn->lemmas) found |= wordnet::normalize_lemma(l) == lemma;
        EXPECT_TRUE(found) << lemma;
        ++checked;
      }
  EXPECT_GT(checked, 1000u);
}

TEST(Wordnet, HyponymPointersResolve) {
  for (const auto& [id, syn] : mini().synsets())
    for (auto h : syn.hyponyms) EXPECT_NE(mini().synset(h), nullptr);
}

// Oracle: follow the raw text of the data files by hand.
TEST(Wordnet, DogHasPuppyAsDirectHyponymInRawFiles) {
  const std::string index = slurp(kMini / "index.noun");
  const std::string data = slurp(kMini / "data.noun");
  auto line_at = [](const std::string& text, std::size_t pos) {
    return text.substr(pos, text.find('\n', pos) - pos);
  };
  auto idx = index.find("\ndog n ");
  ASSERT_NE(idx, std::string::npos);
  std::istringstream entry(line_at(index, idx + 1));
  std::vector<std::string> toks{std::istream_iterator<std::string>(entry), {}};
  bool puppy = false;
  for (const auto& t : toks) {
    if (t.size() != 8 || !std::isdigit(static_cast<unsigned char>(t[0]))) continue;
    std::istringstream rec(line_at(data, std::stoul(t)));
    std::vector<std::string> r{std::istream_iterator<std::string>(rec), {}};
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
      if (r[i] == "~" && line_at(data, std::stoul(r[i + 1])).find(" puppy ") != std::string::npos) puppy = true;
  }
  EXPECT_TRUE(puppy);
  auto words = expand_seeds({"dog"}, mini(), 1);
  EXPECT_TRUE(words.count("dog"));
  EXPECT_TRUE(words.count("puppy"));
}

TEST(Wordnet, FullDatabaseWhenAvailable) {
  const char* dir = std::getenv("CULTURE_WORDNET_DIR");
  if (!dir) GTEST_SKIP() << "CULTURE_WORDNET_DIR not set";
  auto lex = wordnet::parse_wordnet(dir);
  EXPECT_GT(lex.synset_count(), 117000u);
  auto words = expand_seeds({"dog"}, lex, 1);
  EXPECT_TRUE(words.count("puppy"));
  // The bundled subset agrees with the full database on the default seeds.
  for (auto d : kDimensions) {
    auto seeds = read_seed_file(default_seed_path(d));
    EXPECT_EQ(build_dictionary(d, seeds, lex, {}).stems, build_dictionary(d, seeds, mini(), {}).stems);
  }
}

TEST(Wordnet, TinyDatabaseParses) {
  auto lex = wordnet::parse_wordnet(tiny_wordnet("wn_ok"));
  ASSERT_EQ(lex.senses("canine").size(), 1u);
  auto syn = lex.synset(lex.senses("canine")[0]);
  ASSERT_EQ(syn->hyponyms.size(), 1u);
  EXPECT_EQ(lex.synset(syn->hyponyms[0])->lemmas, std::vector<std::string>{"pup"});
}

TEST(Wordnet, Errors) {
  EXPECT_NE(error_of([] { wordnet::parse_wordnet(fresh_dir("wn_empty")); }).find("missing WordNet file"),
            std::string::npos);

  auto msg = error_of([] { wordnet::parse_wordnet(tiny_wordnet("wn_bad_off", "", true)); });
  EXPECT_NE(msg.find("malformed offset"), std::string::npos) << msg;
  EXPECT_NE(msg.find("data.noun"), std::string::npos) << msg;

  msg = error_of([] { wordnet::parse_wordnet(tiny_wordnet("wn_short_off", "1234")); });
  EXPECT_NE(msg.find("malformed offset"), std::string::npos) << msg;

  msg = error_of([] { wordnet::parse_wordnet(tiny_wordnet("wn_dangling", "00099999")); });
  EXPECT_NE(msg.find("dangling pointer"), std::string::npos) << msg;
  EXPECT_NE(msg.find("data.noun @00000019"), std::string::npos) << msg;
}

TEST(Expand, SeedNotInLexiconPassesThrough) {
  EXPECT_EQ(expand_seeds({"zzzunknown"}, mini()), (WordSet{"zzzunknown"}));
  EXPECT_EQ(expand_seeds({"create"}, wordnet::Lexicon{}), (WordSet{"create"}));
}

TEST(Expand, SeedsAlwaysPresentAndMultiwordSplit) {
  auto words = expand_seeds({"trust", "bear market"}, mini());
  EXPECT_TRUE(words.count("trust"));
  EXPECT_TRUE(words.count("bear market"));
  for (const auto& w : words) EXPECT_EQ(w.find('_'), std::string::npos) << w;
}

TEST(Expand, DepthZeroHasNoHyponyms) {
  auto d0 = expand_seeds({"dog"}, mini(), 0);
  auto d1 = expand_seeds({"dog"}, mini(), 1);
  EXPECT_FALSE(d0.count("puppy"));
  EXPECT_TRUE(std::includes(d1.begin(), d1.end(), d0.begin(), d0.end()));
}

TEST(Expand, AdjectivesGetSynonymsOnly) {
  wordnet::Lexicon lex;
  wordnet::SynsetId a{wordnet::Pos::adj, 10}, h{wordnet::Pos::adj, 20};
  lex.add_synset(h, {{"hyp"}, {}});
  lex.add_synset(a, {{"open", "overt"}, {h}});
  lex.add_sense("open", a);
  auto words = expand_seeds({"open"}, lex, 1);
  EXPECT_EQ(words, (WordSet{"open", "overt"}));
}

TEST(BuildDictionary, CreateStemsToCreat) {
  auto d = build_dictionary(Dimension::adhocracy, {"create"}, wordnet::Lexicon{}, {});
  EXPECT_EQ(d.stems, (WordSet{"creat"}));
  EXPECT_EQ(d.provenance.at("creat"), Provenance::seed);
}

TEST(BuildDictionary, ExcludingEverythingFails) {
  EXPECT_THROW(build_dictionary(Dimension::clan, {"trust"}, wordnet::Lexicon{}, {"trust"}), Error);
  EXPECT_THROW(build_dictionary(Dimension::clan, {}, mini(), {}), Error);
}

TEST(BuildDictionary, DuplicateSeeds) {
  auto d = build_dictionary(Dimension::clan, {"trust", "trust"}, wordnet::Lexicon{}, {});
  EXPECT_EQ(d.stems, (WordSet{"trust"}));
}

TEST(BuildDictionary, ProvenancePriority) {
  wordnet::Lexicon lex;
  wordnet::SynsetId s{wordnet::Pos::noun, 1}, h{wordnet::Pos::noun, 2}, h2{wordnet::Pos::noun, 3};
  lex.add_synset(h, {{"pup", "team"}, {}});
  lex.add_synset(h2, {{"whelp"}, {}});
  lex.add_synset(s, {{"team", "squad"}, {h}});
  lex.add_sense("team", s);
  lex.add_synset({wordnet::Pos::noun, 4}, {{"crew", "whelp"}, {h2}});
  lex.add_sense("crew", {wordnet::Pos::noun, 4});
  auto d = build_dictionary(Dimension::clan, {"team", "crew"}, lex, {});
  EXPECT_EQ(d.provenance.at("team"), Provenance::seed);
  EXPECT_EQ(d.provenance.at("squad"), Provenance::synonym);
  EXPECT_EQ(d.provenance.at("pup"), Provenance::hyponym);
  EXPECT_EQ(d.provenance.at("whelp"), Provenance::synonym);
}

TEST(BuildDictionary, PhraseSeedsExpandConstituents) {
  auto d = build_dictionary(Dimension::clan, {"employee involvement"}, mini(), {});
  EXPECT_TRUE(d.contains("employe"));
  EXPECT_TRUE(d.contains("involv"));
  EXPECT_EQ(d.provenance.at("involv"), Provenance::seed);
  EXPECT_FALSE(d.contains("and"));
  // Stopwords from split phrases are dropped, a lone stopword seed is not.
  auto s = build_dictionary(Dimension::adhocracy, {"attention to detail"}, mini(), {});
  EXPECT_FALSE(s.contains("to"));
  EXPECT_TRUE(build_dictionary(Dimension::clan, {"other"}, mini(), {}).contains("other"));
}

TEST(BuildDictionary, InvariantsOnDefaultSeeds) {
  auto ex = read_exclusions(default_data_dir() / "exclusions" / "problematic_stems.txt");
  for (auto dim : kDimensions) {
    auto seeds = read_seed_file(default_seed_path(dim));
    auto d = build_dictionary(dim, seeds, mini(), ex.for_dimension(dim));
    for (const auto& s : d.excluded) EXPECT_FALSE(d.stems.count(s)) << s;
    for (const auto& s : d.stems) {
      EXPECT_TRUE(d.provenance.count(s));
      EXPECT_EQ(s.find_first_not_of("abcdefghijklmnopqrstuvwxyz"), std::string::npos) << s;
    }
    for (const auto& seed : seeds) {
      auto toks = textprep::tokenize(seed);
      if (toks.size() != 1) continue;
      auto st = textprep::stem(toks[0]);
      EXPECT_TRUE(d.stems.count(st) || d.excluded.count(st)) << seed;
    }
    EXPECT_GT(d.stems.size(), seeds.size());
  }
}

TEST(BuildDictionary, ShippedExclusionsRemoveProblemStems) {
  auto ex = read_exclusions(default_data_dir() / "exclusions" / "problematic_stems.txt");
  EXPECT_EQ(ex.for_dimension(Dimension::market), (WordSet{"benefit"}));
  EXPECT_EQ(ex.for_dimension(Dimension::hierarchy), (WordSet{"time"}));
  EXPECT_EQ(ex.for_dimension(Dimension::adhocracy), (WordSet{"advanc", "develop", "grow", "growth"}));
  EXPECT_TRUE(ex.for_dimension(Dimension::clan).empty());
  auto seeds = read_seed_file(default_seed_path(Dimension::adhocracy));
  auto plain = build_dictionary(Dimension::adhocracy, seeds, mini(), {});
  auto cut = build_dictionary(Dimension::adhocracy, seeds, mini(), ex.for_dimension(Dimension::adhocracy));
  EXPECT_TRUE(plain.contains("growth"));
  EXPECT_FALSE(cut.contains("growth"));
}

TEST(BuildDictionary, MonotoneInSeedsAndExclusions) {
  std::vector<std::string> pool;
  for (auto d : kDimensions)
    for (auto& s : read_seed_file(default_seed_path(d))) pool.push_back(s);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> seeds;
    for (int i = 0; i < 3; ++i) seeds.push_back(pool[rng() % pool.size()]);
    auto base = build_dictionary(Dimension::clan, seeds, mini(), {});
    auto more = seeds;
    more.push_back(pool[rng() % pool.size()]);
    auto grown = build_dictionary(Dimension::clan, more, mini(), {});
    EXPECT_TRUE(std::includes(grown.stems.begin(), grown.stems.end(), base.stems.begin(), base.stems.end()));
    auto it = base.stems.begin();
    std::advance(it, rng() % base.stems.size());
    if (base.stems.size() < 2) continue;
    auto cut = build_dictionary(Dimension::clan, seeds, mini(), {*it});
    EXPECT_TRUE(std::includes(base.stems.begin(), base.stems.end(), cut.stems.begin(), cut.stems.end()));
    EXPECT_FALSE(cut.contains(*it));
  }
}

TEST(BuildDictionary, DeterministicFile) {
  auto seeds = read_seed_file(default_seed_path(Dimension::market));
  auto p1 = fs::path(testing::TempDir()) / "dict1.json";
  auto p2 = fs::path(testing::TempDir()) / "dict2.json";
  write_dictionary(p1, build_dictionary(Dimension::market, seeds, wordnet::parse_wordnet(kMini), {}));
  write_dictionary(p2, build_dictionary(Dimension::market, seeds, mini(), {}));
  EXPECT_EQ(slurp(p1), slurp(p2));
  auto back = read_dictionary(p1);
  EXPECT_EQ(back, build_dictionary(Dimension::market, seeds, mini(), {}));
  auto j = nlohmann::json::parse(slurp(p1));
  std::vector<std::string> keys;
  auto ordered = nlohmann::ordered_json::parse(slurp(p1));
  for (auto& [k, v] : ordered.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"dimension", "seeds", "stems", "excluded", "provenance"}));
  EXPECT_EQ(j["dimension"], "market");
}

TEST(SeedFiles, MatchAttributeTable) {
  // Values, Artifacts (behaviors) and Effectiveness Criteria cells, one
  // attribute per entry.
  const std::map<Dimension, std::vector<std::string>> table = {
      {Dimension::clan,
       {"attachment", "affiliation", "collaboration", "trust", "support", "teamwork", "participation",
        "employee involvement", "open communication", "employee satisfaction", "commitment"}},
      {Dimension::adhocracy,
       {"growth", "stimulation", "variety", "autonomy", "attention to detail", "risk-taking", "creativity",
        "adaptability", "innovation"}},
      {Dimension::market,
       {"communication", "competition", "competence", "achievement", "gathering customer and competitor information",
        "goal-setting", "planning", "task focus", "competitiveness", "aggressiveness", "increased market share",
        "profit", "product quality", "productivity"}},
      {Dimension::hierarchy,
       {"communication", "routinization", "formalization", "consistency", "conformity", "predictability",
        "efficiency", "timeliness", "smooth functioning"}},
  };
  for (const auto& [dim, expected] : table) EXPECT_EQ(read_seed_file(default_seed_path(dim)), expected);
  for (auto dim : kDimensions) {
    auto base = read_seed_file(default_seed_path(dim));
    auto ext = read_seed_file(default_seed_path(dim, true));
    ASSERT_GE(ext.size(), base.size());
    EXPECT_TRUE(std::equal(base.begin(), base.end(), ext.begin()));
  }
}

TEST(ExternalDictionary, WordList) {
  auto p = fs::path(testing::TempDir()) / "words.txt";
  write(p, "team\ntrust\n");
  auto d = load_external_dictionary(p, Dimension::clan);
  EXPECT_EQ(d.stems, (WordSet{"team", "trust"}));
  for (auto& [s, prov] : d.provenance) EXPECT_EQ(prov, Provenance::seed);
}

TEST(ExternalDictionary, EmptyFileFails) {
  auto p = fs::path(testing::TempDir()) / "empty.txt";
  write(p, "");
  EXPECT_THROW(load_external_dictionary(p, Dimension::clan), Error);
  write(p, "# only a comment\n\n");
  EXPECT_THROW(load_external_dictionary(p, Dimension::clan), Error);
  write(p, "{not json");
  EXPECT_THROW(load_external_dictionary(p, Dimension::clan), Error);
}

TEST(ExternalDictionary, ReloadIsIdempotent) {
  auto p = fs::path(testing::TempDir()) / "stems.txt";
  write(p, "creat\nteam\ncollabor\ninnov\nefficienc*\n");
  auto d = load_external_dictionary(p, Dimension::adhocracy);
  EXPECT_EQ(d.stems, (WordSet{"collabor", "creat", "efficienc", "innov", "team"}));
  auto j = fs::path(testing::TempDir()) / "stems.json";
  write_dictionary(j, d);
  EXPECT_EQ(load_external_dictionary(j, Dimension::adhocracy).stems, d.stems);
  EXPECT_THROW(load_external_dictionary(j, Dimension::clan), Error);
}

TEST(Exclusions, FileFormat) {
  auto p = fs::path(testing::TempDir()) / "ex.txt";
  write(p, "# c\nfoo\nclan bar\n\n");
  auto ex = read_exclusions(p);
  EXPECT_EQ(ex.for_dimension(Dimension::clan), (WordSet{"bar", "foo"}));
  EXPECT_EQ(ex.for_dimension(Dimension::market), (WordSet{"foo"}));
  write(p, "nowhere bar\n");
  EXPECT_THROW(read_exclusions(p), Error);
}
