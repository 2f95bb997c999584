#pragma once

// Reader for WordNet 3.0 database files (index.{noun,verb,adj,adv} and
// data.{noun,verb,adj,adv}). Only what dictionary expansion needs is kept:
// lemma -> synsets, synset -> member lemmas and hyponym ('~') pointers.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "culture/core.hpp"

namespace culture::wordnet {

enum class Pos : char { noun = 'n', verb = 'v', adj = 'a', adv = 'r' };

inline constexpr std::array<Pos, 4> kPos = {Pos::noun, Pos::verb, Pos::adj, Pos::adv};

inline constexpr std::string_view file_suffix(Pos p) {
  switch (p) {
    case Pos::noun: return "noun";
    case Pos::verb: return "verb";
    case Pos::adj: return "adj";
    case Pos::adv: return "adv";
  }
  return "";
}

struct SynsetId {
  Pos pos = Pos::noun;
  std::uint32_t offset = 0;
  auto operator<=>(const SynsetId&) const = default;
};

struct Synset {
  std::vector<std::string> lemmas;  // as written in the data file, underscores for spaces
  std::vector<SynsetId> hyponyms;
};

// Lowercase with spaces mapped to underscores, the form index files use.
inline std::string normalize_lemma(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) out += c == ' ' ? '_' : static_cast<char>(std::tolower(c));
  return out;
}

class Lexicon {
 public:
  // Synsets of the lemma in every part of speech (noun, verb, adj, adv order).
  std::vector<SynsetId> senses(std::string_view lemma) const {
    std::vector<SynsetId> out;
    auto key = normalize_lemma(lemma);
    for (const auto& idx : index_) {
      auto it = idx.find(key);
      if (it != idx.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  }

  std::vector<SynsetId> senses(std::string_view lemma, Pos pos) const {
    const auto& idx = index_[pos_slot(pos)];
    auto it = idx.find(normalize_lemma(lemma));
    return it == idx.end() ? std::vector<SynsetId>{} : it->second;
  }

  const Synset* synset(SynsetId id) const {
    auto it = synsets_.find(id);
    return it == synsets_.end() ? nullptr : &it->second;
  }

  std::size_t synset_count() const { return synsets_.size(); }
  std::size_t lemma_count() const {
    std::size_t n = 0;
    for (const auto& idx : index_) n += idx.size();
    return n;
  }
  bool empty() const { return synsets_.empty(); }

  // Builders (used by the parser and by tests that assemble tiny lexicons).
  void add_synset(SynsetId id, Synset s) { synsets_[id] = std::move(s); }
  void add_sense(std::string_view lemma, SynsetId id) { index_[pos_slot(id.pos)][normalize_lemma(lemma)].push_back(id); }

  const std::map<SynsetId, Synset>& synsets() const { return synsets_; }
  const std::map<std::string, std::vector<SynsetId>, std::less<>>& index(Pos pos) const {
    return index_[pos_slot(pos)];
  }

 private:
  static std::size_t pos_slot(Pos p) {
    switch (p) {
      case Pos::noun: return 0;
      case Pos::verb: return 1;
      case Pos::adj: return 2;
      default: return 3;
    }
  }
  std::array<std::map<std::string, std::vector<SynsetId>, std::less<>>, 4> index_;
  std::map<SynsetId, Synset> synsets_;
};

namespace detail {

inline Pos pos_from_char(char c, const std::string& where) {
  switch (c) {
    case 'n': return Pos::noun;
    case 'v': return Pos::verb;
    case 'a':
    case 's': return Pos::adj;
    case 'r': return Pos::adv;
    default: throw Error(where + ": unknown part of speech '" + std::string(1, c) + "'");
  }
}

inline std::uint32_t parse_offset(const std::string& tok, const std::string& where) {
  if (tok.size() != 8 || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw Error(where + ": malformed offset '" + tok + "'");
  return static_cast<std::uint32_t>(std::stoul(tok));
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("missing WordNet file '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Strips adjective position markers such as "(p)", "(a)", "(ip)".
inline std::string strip_marker(std::string w) {
  if (!w.empty() && w.back() == ')') {
    auto open = w.rfind('(');
    if (open != std::string::npos) w.resize(open);
  }
  return w;
}

struct PendingPointer {
  SynsetId from, to;
  std::string file;
};

inline void parse_data(const std::filesystem::path& path, Pos pos, Lexicon& lex, std::vector<PendingPointer>& ptrs) {
  const std::string text = read_file(path);
  const std::string fname = path.filename().string();
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + begin, end - begin);
    const std::size_t line_offset = begin;
    begin = end + 1;
    if (line.empty() || line[0] == ' ') continue;  // license header
    auto bar = line.find(" | ");
    std::istringstream ss(std::string(line.substr(0, bar)));
    std::string off_tok, lexfile, type, wcnt_tok;
    ss >> off_tok >> lexfile >> type >> wcnt_tok;
    const std::string where = fname + " @" + off_tok;
    const std::uint32_t offset = parse_offset(off_tok, fname + " byte " + std::to_string(line_offset));
    if (offset != line_offset)
      throw Error(where + ": malformed offset (record sits at byte " + std::to_string(line_offset) + ")");
    if (type.size() != 1) throw Error(where + ": bad synset type");
    if (pos_from_char(type[0], where) != pos) throw Error(where + ": synset type does not match file");
    Synset s;
    std::size_t wcnt = 0;
    try {
      wcnt = std::stoul(wcnt_tok, nullptr, 16);
    } catch (const std::exception&) {
      throw Error(where + ": bad word count");
    }
    for (std::size_t i = 0; i < wcnt; ++i) {
      std::string word, lex_id;
      if (!(ss >> word >> lex_id)) throw Error(where + ": truncated word list");
      s.lemmas.push_back(strip_marker(word));
    }
    std::string pcnt_tok;
    if (!(ss >> pcnt_tok)) throw Error(where + ": missing pointer count");
    std::size_t pcnt = std::stoul(pcnt_tok);
    const SynsetId self{pos, offset};
    for (std::size_t i = 0; i < pcnt; ++i) {
      std::string sym, target, tpos, srctgt;
      if (!(ss >> sym >> target >> tpos >> srctgt)) throw Error(where + ": truncated pointer list");
      if (sym != "~") continue;
      SynsetId to{pos_from_char(tpos.at(0), where), parse_offset(target, where)};
      s.hyponyms.push_back(to);
      ptrs.push_back({self, to, fname});
    }
    lex.add_synset(self, std::move(s));
  }
}

inline void parse_index(const std::filesystem::path& path, Pos pos, Lexicon& lex) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing WordNet file '" + path.string() + "'");
  const std::string fname = path.filename().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == ' ') continue;
    const std::string where = fname + " line " + std::to_string(lineno);
    std::istringstream ss(line);
    std::string lemma, p, synset_cnt_tok, p_cnt_tok;
    if (!(ss >> lemma >> p >> synset_cnt_tok >> p_cnt_tok)) throw Error(where + ": truncated entry");
    std::size_t synset_cnt = std::stoul(synset_cnt_tok), p_cnt = std::stoul(p_cnt_tok);
    std::string skip;
    for (std::size_t i = 0; i < p_cnt; ++i) ss >> skip;
    ss >> skip >> skip;  // sense_cnt, tagsense_cnt
    for (std::size_t i = 0; i < synset_cnt; ++i) {
      std::string off;
      if (!(ss >> off)) throw Error(where + ": truncated synset list");
      SynsetId id{pos, parse_offset(off, where)};
      if (!lex.synset(id))
        throw Error(where + ": dangling pointer to " + std::string(file_suffix(pos)) + " synset " + off);
      lex.add_sense(lemma, id);
    }
  }
}

}  // namespace detail

// Parses all four parts of speech from a WordNet 3.0 dict directory.
inline Lexicon parse_wordnet(const std::filesystem::path& dir) {
  Lexicon lex;
  std::vector<detail::PendingPointer> ptrs;
  for (Pos p : kPos) detail::parse_data(dir / ("data." + std::string(file_suffix(p))), p, lex, ptrs);
  for (const auto& ptr : ptrs)
    if (!lex.synset(ptr.to)) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%08u", ptr.from.offset);
      throw Error(ptr.file + " @" + buf + ": dangling pointer to synset " + std::to_string(ptr.to.offset));
    }
  for (Pos p : kPos) detail::parse_index(dir / ("index." + std::string(file_suffix(p))), p, lex);
  return lex;
}

}  // namespace culture::wordnet
