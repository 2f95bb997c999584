#pragma once

// Per-dimension culture dictionaries: seed attribute words expanded with
// WordNet synonyms and hyponyms, stemmed, minus excluded stems.

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "culture/core.hpp"
#include "culture/textprep.hpp"
#include "culture/wordnet.hpp"

namespace culture::lexicon {

using textprep::WordSet;

enum class Provenance { seed = 0, synonym = 1, hyponym = 2 };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::seed: return "seed";
    case Provenance::synonym: return "synonym";
    case Provenance::hyponym: return "hyponym";
  }
  return "";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "seed") return Provenance::seed;
  if (s == "synonym") return Provenance::synonym;
  if (s == "hyponym") return Provenance::hyponym;
  throw Error("unknown provenance '" + std::string(s) + "'");
}

struct CultureDictionary {
  Dimension dimension = Dimension::clan;
  std::vector<std::string> seeds;
  WordSet stems;
  WordSet excluded;
  std::map<std::string, Provenance, std::less<>> provenance;

  bool contains(std::string_view stem) const { return stems.count(stem) > 0; }
  friend bool operator==(const CultureDictionary&, const CultureDictionary&) = default;
};

struct BuildOptions {
  int hyponym_depth = 1;
  textprep::PreprocessConfig text;
};

namespace detail {

inline void note(std::map<std::string, Provenance, std::less<>>& out, std::string word, Provenance p) {
  auto [it, fresh] = out.emplace(std::move(word), p);
  if (!fresh && p < it->second) it->second = p;
}

inline void add_lemma(std::map<std::string, Provenance, std::less<>>& out, std::string_view lemma, Provenance p) {
  std::string lower = wordnet::normalize_lemma(lemma);
  std::size_t start = 0;
  for (;;) {
    auto us = lower.find('_', start);
    auto part = lower.substr(start, us == std::string::npos ? std::string::npos : us - start);
    if (!part.empty()) note(out, part, p);
    if (us == std::string::npos) break;
    start = us + 1;
  }
}

}  // namespace detail

// Seeds, synonyms (all senses, all parts of speech) and hyponyms (nouns and
// verbs, up to depth) with the strongest provenance each word was reached by.
inline std::map<std::string, Provenance, std::less<>> expand_with_provenance(const std::vector<std::string>& seeds,
                                                                           const wordnet::Lexicon& lex,
                                                                           int hyponym_depth = 1) {
  std::map<std::string, Provenance, std::less<>> out;
  for (const auto& s : seeds) {
    detail::note(out, s, Provenance::seed);
    std::set<wordnet::SynsetId> seen;
    std::deque<std::pair<wordnet::SynsetId, int>> frontier;
    for (auto id : lex.senses(s)) {
      const auto* syn = lex.synset(id);
      if (!syn) continue;
      for (const auto& l : syn->lemmas) detail::add_lemma(out, l, Provenance::synonym);
      if (id.pos == wordnet::Pos::noun || id.pos == wordnet::Pos::verb) frontier.emplace_back(id, 0);
      seen.insert(id);
    }
    while (!frontier.empty()) {
      auto [id, depth] = frontier.front();
      frontier.pop_front();
      if (depth >= hyponym_depth) continue;
      for (auto h : lex.synset(id)->hyponyms) {
        if (!seen.insert(h).second) continue;
        const auto* syn = lex.synset(h);
        if (!syn) continue;
        for (const auto& l : syn->lemmas) detail::add_lemma(out, l, Provenance::hyponym);
        frontier.emplace_back(h, depth + 1);
      }
    }
  }
  return out;
}

inline WordSet expand_seeds(const std::vector<std::string>& seeds, const wordnet::Lexicon& lex,
                            int hyponym_depth = 1) {
  if (seeds.empty()) throw Error("no seeds given");
  WordSet out;
  for (auto& [w, p] : expand_with_provenance(seeds, lex, hyponym_depth)) out.insert(w);
  return out;
}

// Seed phrases ("employee involvement") are expanded as a whole and through
// each of their content words.
inline CultureDictionary build_dictionary(Dimension dimension, const std::vector<std::string>& seeds,
                                          const wordnet::Lexicon& lex, const WordSet& exclusions,
                                          const BuildOptions& opt = {}) {
  if (seeds.empty()) throw Error("no seeds given for " + std::string(to_string(dimension)));
  const auto& cfg = opt.text;
  std::vector<std::string> inputs;
  for (const auto& s : seeds) {
    inputs.push_back(s);
    auto toks = textprep::tokenize(s);
    if (toks.size() > 1)
      for (const auto& t : textprep::remove_stopwords(toks, cfg)) inputs.push_back(t);
  }
  auto expanded = expand_with_provenance(inputs, lex, opt.hyponym_depth);

  CultureDictionary d;
  d.dimension = dimension;
  d.seeds = seeds;
  d.excluded = exclusions;
  for (const auto& [word, prov] : expanded) {
    auto toks = textprep::tokenize(word);
    // A single-token seed is kept even when it is a stopword.
    auto content = toks.size() == 1 && prov == Provenance::seed ? toks : textprep::remove_stopwords(toks, cfg);
    for (const auto& t : content) {
      auto st = textprep::content_stem(t, cfg.stemmer);
      if (st.empty() || exclusions.count(st)) continue;
      d.stems.insert(st);
      detail::note(d.provenance, st, prov);
    }
  }
  if (d.stems.empty()) throw Error("dictionary for " + std::string(to_string(dimension)) + " is empty");
  return d;
}

inline nlohmann::ordered_json to_json(const CultureDictionary& d) {
  nlohmann::ordered_json j;
  j["dimension"] = to_string(d.dimension);
  j["seeds"] = d.seeds;
  j["stems"] = std::vector<std::string>(d.stems.begin(), d.stems.end());
  j["excluded"] = std::vector<std::string>(d.excluded.begin(), d.excluded.end());
  j["provenance"] = nlohmann::ordered_json::object();
  for (const auto& [s, p] : d.provenance) j["provenance"][s] = to_string(p);
  return j;
}

inline CultureDictionary dictionary_from_json(const nlohmann::json& j) {
  CultureDictionary d;
  d.dimension = dimension_or_throw(j.at("dimension").get<std::string>());
  d.seeds = j.value("seeds", std::vector<std::string>{});
  for (const auto& s : j.at("stems")) d.stems.insert(s.get<std::string>());
  if (j.contains("excluded"))
    for (const auto& s : j["excluded"]) d.excluded.insert(s.get<std::string>());
  if (j.contains("provenance"))
    for (const auto& [k, v] : j["provenance"].items()) d.provenance[k] = parse_provenance(v.get<std::string>());
  for (const auto& s : d.stems)
    if (!d.provenance.count(s)) d.provenance[s] = Provenance::seed;
  for (const auto& s : d.excluded)
    if (d.stems.count(s)) throw Error("stem '" + s + "' is both in the dictionary and excluded");
  return d;
}

inline void write_dictionary(const std::filesystem::path& path, const CultureDictionary& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_json(d).dump(2) << "\n";
}

inline CultureDictionary read_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  try {
    return dictionary_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// Either a dictionary JSON file or a plain word list (one entry per line,
// '#' comments). Words are stemmed on load; an entry ending in '*' is taken
// as a stem verbatim.
inline CultureDictionary load_external_dictionary(const std::filesystem::path& path, Dimension dimension,
                                                  textprep::StemmerKind stemmer = textprep::StemmerKind::porter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error(path.string() + ": empty dictionary");

  CultureDictionary d;
  d.dimension = dimension;
  if (text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ": " + e.what());
    }
    d = dictionary_from_json(j);
    if (d.dimension != dimension)
      throw Error(path.string() + ": dictionary is for " + std::string(to_string(d.dimension)) + ", expected " +
                  std::string(to_string(dimension)));
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      auto e = line.find_last_not_of(" \t\r");
      std::string entry = line.substr(b, e - b + 1);
      d.seeds.push_back(entry);
      if (entry.back() == '*') {
        entry.pop_back();
        for (auto& c : entry) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (!entry.empty()) d.stems.insert(entry);
        continue;
      }
      for (const auto& t : textprep::tokenize(entry)) {
        auto st = textprep::content_stem(t, stemmer);
        if (!st.empty()) d.stems.insert(st);
      }
    }
  }
  if (d.stems.empty()) throw Error(path.string() + ": empty dictionary");
  d.provenance.clear();
  for (const auto& s : d.stems) d.provenance[s] = Provenance::seed;
  return d;
}

// Seed file: one attribute word or phrase per line, '#' comments.
inline std::vector<std::string> read_seed_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read seed file '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  if (out.empty()) throw Error("seed file '" + path.string() + "' is empty");
  return out;
}

// Exclusion file lines: "stem" (every dimension) or "dimension stem".
struct Exclusions {
  WordSet global;
  std::map<Dimension, WordSet> per_dimension;

  WordSet for_dimension(Dimension d) const {
    WordSet out = global;
    auto it = per_dimension.find(d);
    if (it != per_dimension.end()) out.insert(it->second.begin(), it->second.end());
    return out;
  }
};

inline Exclusions read_exclusions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read exclusion file '" + path.string() + "'");
  Exclusions ex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a) || a[0] == '#') continue;
    if (ss >> b) {
      if (ss >> extra) throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 'dimension stem'");
      auto dim = parse_dimension(a);
      if (!dim) throw Error(path.string() + ":" + std::to_string(lineno) + ": unknown dimension '" + a + "'");
      ex.per_dimension[*dim].insert(b);
    } else {
      ex.global.insert(a);
    }
  }
  return ex;
}

inline std::filesystem::path default_data_dir() {
#ifdef CULTURE_DATA_DIR
  return CULTURE_DATA_DIR;
#else
  return "data";
#endif
}

inline std::filesystem::path default_seed_path(Dimension d, bool extended = false) {
  auto dir = default_data_dir() / "seeds";
  if (extended) dir /= "extended";
  return dir / (std::string(to_string(d)) + ".txt");
}

}  // namespace culture::lexicon
