#pragma once

// Sentence splitting, tokenization, stopword removal, stemming and negation
// scope detection for the dictionary pipeline.

#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "culture/core.hpp"
#include "culture/porter.hpp"

namespace culture::textprep {

using WordSet = std::set<std::string, std::less<>>;

// The classic English stopword list (ranks.nl default list).
inline const WordSet& default_stopwords() {
  static const WordSet words = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
      "are", "aren't", "as", "at", "be", "because", "been", "before", "being", "below",
      "between", "both", "but", "by", "can't", "cannot", "could", "couldn't", "did",
      "didn't", "do", "does", "doesn't", "doing", "don't", "down", "during", "each", "few",
      "for", "from", "further", "had", "hadn't", "has", "hasn't", "have", "haven't",
      "having", "he", "he'd", "he'll", "he's", "her", "here", "here's", "hers", "herself",
      "him", "himself", "his", "how", "how's", "i", "i'd", "i'll", "i'm", "i've", "if",
      "in", "into", "is", "isn't", "it", "it's", "its", "itself", "let's", "me", "more",
      "most", "mustn't", "my", "myself", "no", "nor", "not", "of", "off", "on", "once",
      "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own",
      "same", "shan't", "she", "she'd", "she'll", "she's", "should", "shouldn't", "so",
      "some", "such", "than", "that", "that's", "the", "their", "theirs", "them",
      "themselves", "then", "there", "there's", "these", "they", "they'd", "they'll",
      "they're", "they've", "this", "those", "through", "to", "too", "under", "until", "up",
      "very", "was", "wasn't", "we", "we'd", "we'll", "we're", "we've", "were", "weren't",
      "what", "what's", "when", "when's", "where", "where's", "which", "while", "who",
      "who's", "whom", "why", "why's", "with", "won't", "would", "wouldn't", "you", "you'd",
      "you'll", "you're", "you've", "your", "yours", "yourself", "yourselves"};
  return words;
}

inline const WordSet& default_negation_words() {
  static const WordSet words = {
      "not", "never", "no", "n't", "don't", "doesn't", "didn't", "can't", "cannot", "won't",
      "wouldn't", "shouldn't", "isn't", "aren't", "wasn't", "weren't", "neither", "nor",
      "nothing", "nobody", "none", "without"};
  return words;
}

enum class StemmerKind { porter, none };

struct PreprocessConfig {
  WordSet stopwords = default_stopwords();
  WordSet negation_words = default_negation_words();
  StemmerKind stemmer = StemmerKind::porter;
};

// One word per line; blank lines and lines starting with '#' are skipped.
inline WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word list '" + path + "'");
  WordSet out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    std::string w = line.substr(b);
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.insert(std::move(w));
  }
  return out;
}

struct Span {
  std::size_t begin = 0, end = 0;  // [begin, end) byte offsets
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

inline bool is_sentence_delim(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

// Spans between delimiters ('.', '!', '?', newline), trimmed of surrounding
// whitespace; spans with no non-space content are dropped.
inline std::vector<Span> split_sentences(std::string_view text) {
  std::vector<Span> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::size_t b = start, e = end;
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) out.push_back({b, e});
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_sentence_delim(text[i])) {
      flush(i);
      start = i + 1;
    }
  }
  flush(text.size());
  return out;
}

struct Token {
  std::string text;  // lowercase
  Span span;         // into the source text
};

namespace detail {
inline bool is_letter(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Apostrophe at i: ASCII '\'' (1 byte) or U+2019 (3 bytes). Returns byte length or 0.
inline std::size_t apostrophe_len(std::string_view s, std::size_t i) {
  if (s[i] == '\'') return 1;
  if (s.size() - i >= 3 && static_cast<unsigned char>(s[i]) == 0xE2 &&
      static_cast<unsigned char>(s[i + 1]) == 0x80 && static_cast<unsigned char>(s[i + 2]) == 0x99)
    return 3;
  return 0;
}
}  // namespace detail

// Lowercase maximal letter runs. An apostrophe followed by a letter stays
// inside the run, so contractions such as "don't" survive as one token.
inline std::vector<Token> tokenize_spans(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!detail::is_letter(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    Token t;
    t.span.begin = i;
    while (i < text.size()) {
      unsigned char c = static_cast<unsigned char>(text[i]);
      if (detail::is_letter(c)) {
        t.text += static_cast<char>(std::tolower(c));
        ++i;
        continue;
      }
      std::size_t al = detail::apostrophe_len(text, i);
      if (al && i + al < text.size() && detail::is_letter(static_cast<unsigned char>(text[i + al]))) {
        t.text += '\'';
        i += al;
        continue;
      }
      break;
    }
    t.span.end = i;
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_spans(text)) out.push_back(std::move(t.text));
  return out;
}

inline std::string stem(std::string_view token, StemmerKind kind = StemmerKind::porter) {
  if (kind == StemmerKind::none) return std::string(token);
  return porter::stem(token);
}

template <class Range>
bool detect_negation(const Range& tokens, const PreprocessConfig& cfg) {
  for (const auto& t : tokens)
    if (cfg.negation_words.count(std::string_view(t))) return true;
  return false;
}

inline std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                                 const PreprocessConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& t : tokens)
    if (!cfg.stopwords.count(t) && !cfg.negation_words.count(t)) out.push_back(t);
  return out;
}

// Content form of a token: possessive "'s" dropped, remaining apostrophes
// removed, then stemmed.
inline std::string content_stem(std::string_view token, StemmerKind kind) {
  std::string w(token);
  if (w.size() > 2 && w.compare(w.size() - 2, 2, "'s") == 0) w.resize(w.size() - 2);
  std::erase(w, '\'');
  return stem(w, kind);
}

struct TokenizedSentence {
  Span raw_span;
  std::vector<std::string> tokens;  // content stems, stopwords and negation words removed
  bool negated = false;
  friend bool operator==(const TokenizedSentence&, const TokenizedSentence&) = default;
};

inline std::vector<TokenizedSentence> preprocess(std::string_view text, const PreprocessConfig& cfg) {
  std::vector<TokenizedSentence> out;
  for (const Span& s : split_sentences(text)) {
    auto raw = tokenize(text.substr(s.begin, s.size()));
    TokenizedSentence ts;
    ts.raw_span = s;
    ts.negated = detect_negation(raw, cfg);
    for (const auto& t : remove_stopwords(raw, cfg)) {
      auto st = content_stem(t, cfg.stemmer);
      if (!st.empty()) ts.tokens.push_back(std::move(st));
    }
    out.push_back(std::move(ts));
  }
  return out;
}

}  // namespace culture::textprep
