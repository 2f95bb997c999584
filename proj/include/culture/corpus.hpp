#pragma once

// Review data model, JSONL/CSV ingestion, section composition and splitting.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "culture/core.hpp"
#include "culture/csv.hpp"

namespace culture {

struct LabelSet {
  TriLabel clan = TriLabel::neutral;
  TriLabel adhocracy = TriLabel::neutral;
  TriLabel market = TriLabel::neutral;
  TriLabel hierarchy = TriLabel::neutral;
  Dimension dominant = Dimension::clan;

  TriLabel tri(Dimension d) const {
    switch (d) {
      case Dimension::clan: return clan;
      case Dimension::adhocracy: return adhocracy;
      case Dimension::market: return market;
      case Dimension::hierarchy: return hierarchy;
    }
    return TriLabel::neutral;
  }
  TriLabel& tri(Dimension d) {
    switch (d) {
      case Dimension::clan: return clan;
      case Dimension::adhocracy: return adhocracy;
      case Dimension::market: return market;
      default: return hierarchy;
    }
  }

  Label get(Task t) const { return is_tri(t) ? code(tri(dimension_of(t))) : index_of(dominant); }
  void set(Task t, Label l) {
    if (!in_domain(t, l)) throw Error("label " + std::to_string(l) + " outside domain of task " + std::string(to_string(t)));
    if (is_tri(t))
      tri(dimension_of(t)) = tri_from_code(l);
    else
      dominant = static_cast<Dimension>(l);
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

inline nlohmann::ordered_json to_json(const LabelSet& l) {
  nlohmann::ordered_json j;
  for (Dimension d : kDimensions) j[std::string(to_string(d))] = code(l.tri(d));
  j["dominant"] = std::string(to_string(l.dominant));
  return j;
}

inline LabelSet label_set_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("labels must be an object");
  LabelSet l;
  for (Dimension d : kDimensions) {
    auto key = std::string(to_string(d));
    if (!j.contains(key)) throw Error("labels missing '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw Error("label '" + key + "' must be an integer -1, 0 or 1");
    l.tri(d) = tri_from_code(v.get<long long>());
  }
  if (!j.contains("dominant") || !j.at("dominant").is_string()) throw Error("labels missing 'dominant'");
  l.dominant = dimension_or_throw(j.at("dominant").get<std::string>());
  return l;
}

// Count of maximal non-whitespace runs.
inline std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    bool ws = std::isspace(c) != 0;
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

inline constexpr std::string_view kSectionSeparator = "\n\n";

// Joins the non-blank sections in a seeded order. The permutation depends only
// on the seed and the number of non-blank sections.
inline std::string compose_text(const std::vector<std::string>& sections, std::int64_t seed) {
  std::vector<const std::string*> kept;
  for (const auto& s : sections)
    if (!is_blank(s)) kept.push_back(&s);
  std::vector<std::size_t> order(kept.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto eng = make_engine(seed);
  seeded_shuffle(order, eng);
  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += kSectionSeparator;
    out += *kept[order[i]];
  }
  return out;
}

struct Review {
  std::string id;
  std::vector<std::string> sections;
  std::string composed_text;
  std::size_t word_count = 0;

  void compose(std::int64_t seed) {
    composed_text = compose_text(sections, seed);
    word_count = culture::word_count(composed_text);
  }

  friend bool operator==(const Review&, const Review&) = default;
};

struct LabeledReview {
  Review review;
  std::optional<LabelSet> labels;

  const std::string& id() const { return review.id; }
  friend bool operator==(const LabeledReview&, const LabeledReview&) = default;
};

using Corpus = std::vector<LabeledReview>;

enum class CorpusFormat { jsonl, csv };

inline CorpusFormat format_for_path(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == "csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
}

namespace detail {

inline void check_unique_ids(const Corpus& corpus) {
  std::set<std::string> seen;
  for (const auto& r : corpus)
    if (!seen.insert(r.id()).second) throw Error("duplicate review id '" + r.id() + "'");
}

// If composed_text is absent from the record it is derived from sections with
// the provided seed; present texts are kept verbatim.
inline LabeledReview review_from_json(const nlohmann::json& j, std::int64_t compose_seed) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  LabeledReview lr;
  if (!j.contains("id") || !j.at("id").is_string()) throw Error("missing string field 'id'");
  lr.review.id = j.at("id").get<std::string>();
  if (lr.review.id.empty()) throw Error("empty id");
  if (!j.contains("sections") || !j.at("sections").is_array()) throw Error("missing array field 'sections'");
  for (const auto& s : j.at("sections")) {
    if (!s.is_string()) throw Error("sections must be strings");
    lr.review.sections.push_back(s.get<std::string>());
  }
  if (j.contains("composed_text") && j.at("composed_text").is_string()) {
    lr.review.composed_text = j.at("composed_text").get<std::string>();
    lr.review.word_count = word_count(lr.review.composed_text);
  } else {
    lr.review.compose(compose_seed);
  }
  if (j.contains("labels") && !j.at("labels").is_null()) lr.labels = label_set_from_json(j.at("labels"));
  return lr;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const LabeledReview& r) {
  nlohmann::ordered_json j;
  j["id"] = r.review.id;
  j["sections"] = r.review.sections;
  j["composed_text"] = r.review.composed_text;
  if (r.labels) j["labels"] = to_json(*r.labels);
  return j;
}

inline Corpus read_jsonl(std::istream& is, std::int64_t compose_seed = 0) {
  Corpus out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    try {
      out.push_back(detail::review_from_json(nlohmann::json::parse(line), compose_seed));
    } catch (const nlohmann::json::exception& e) {
      throw Error("line " + std::to_string(lineno) + ": malformed record: " + e.what());
    } catch (const Error& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  detail::check_unique_ids(out);
  return out;
}

// CSV: header row with `id`, `section_1..section_k`, optional label columns
// (clan, adhocracy, market, hierarchy, dominant) and optional composed_text.
inline Corpus read_csv(std::istream& is, std::int64_t compose_seed = 0) {
  auto records = csv::read_all(is);
  if (records.empty()) return {};
  const auto& header = records.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.count("id")) throw Error("line 1: csv header lacks 'id' column");
  std::vector<std::pair<int, std::size_t>> section_cols;
  for (const auto& [name, i] : col)
    if (name.rfind("section_", 0) == 0) section_cols.emplace_back(std::stoi(name.substr(8)), i);
  std::sort(section_cols.begin(), section_cols.end());
  bool has_labels = false;
  for (Dimension d : kDimensions) has_labels |= col.count(std::string(to_string(d))) > 0;
  has_labels |= col.count("dominant") > 0;

  Corpus out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    auto at = [&](const std::string& name) -> std::string {
      auto i = col.at(name);
      if (i >= rec.fields.size()) throw Error("line " + std::to_string(rec.line) + ": missing column '" + name + "'");
      return rec.fields[i];
    };
    try {
      LabeledReview lr;
      lr.review.id = at("id");
      if (lr.review.id.empty()) throw Error("empty id");
      for (auto [k, i] : section_cols)
        if (i < rec.fields.size() && !rec.fields[i].empty()) lr.review.sections.push_back(rec.fields[i]);
      if (col.count("composed_text") && !at("composed_text").empty()) {
        lr.review.composed_text = at("composed_text");
        lr.review.word_count = word_count(lr.review.composed_text);
      } else {
        lr.review.compose(compose_seed);
      }
      if (has_labels) {
        LabelSet l;
        for (Dimension d : kDimensions) {
          auto name = std::string(to_string(d));
          if (!col.count(name)) throw Error("label column '" + name + "' missing");
          auto v = at(name);
          std::size_t used = 0;
          long long c = 0;
          try {
            c = std::stoll(v, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used == 0 || used != v.size()) throw Error("label '" + name + "' is not an integer: '" + v + "'");
          l.tri(d) = tri_from_code(c);
        }
        if (!col.count("dominant")) throw Error("label column 'dominant' missing");
        l.dominant = dimension_or_throw(at("dominant"));
        lr.labels = l;
      }
      out.push_back(std::move(lr));
    } catch (const Error& e) {
      std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw Error("line " + std::to_string(rec.line) + ": " + msg);
    }
  }
  detail::check_unique_ids(out);
  return out;
}

inline Corpus ingest(const std::string& path, CorpusFormat format, std::int64_t compose_seed = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return format == CorpusFormat::csv ? read_csv(in, compose_seed) : read_jsonl(in, compose_seed);
}

inline Corpus ingest(const std::string& path, std::int64_t compose_seed = 0) {
  return ingest(path, format_for_path(path), compose_seed);
}

inline void write_jsonl(std::ostream& os, const Corpus& corpus) {
  for (const auto& r : corpus) os << to_json(r).dump() << '\n';
}

inline void write_jsonl(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_jsonl(out, corpus);
}

inline void recompose(Corpus& corpus, std::int64_t seed) {
  for (auto& r : corpus) r.review.compose(seed);
}

struct SplitSizes {
  std::size_t train = 1400, validation = 200, test = 400;
};

struct SplitAssignment {
  std::vector<std::string> train, validation, test;
  std::vector<std::string> leftover;  // excluded when sizes sum below corpus size
};

// Seeded partition. Ids are sorted before shuffling so the result depends
// only on the id set and the seed.
inline SplitAssignment split(const Corpus& corpus, SplitSizes sizes, std::int64_t seed) {
  const std::size_t total = sizes.train + sizes.validation + sizes.test;
  if (total > corpus.size())
    throw Error("split sizes sum to " + std::to_string(total) + " but corpus has " +
                std::to_string(corpus.size()) + " reviews");
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& r : corpus) ids.push_back(r.id());
  std::sort(ids.begin(), ids.end());
  auto eng = make_engine(seed);
  seeded_shuffle(ids, eng);
  SplitAssignment s;
  auto take = [&, pos = std::size_t{0}](std::size_t n, std::vector<std::string>& dst) mutable {
    dst.assign(ids.begin() + pos, ids.begin() + pos + n);
    pos += n;
  };
  take(sizes.train, s.train);
  take(sizes.validation, s.validation);
  take(sizes.test, s.test);
  take(corpus.size() - total, s.leftover);
  return s;
}

inline nlohmann::ordered_json to_json(const SplitAssignment& s) {
  nlohmann::ordered_json j;
  j["train"] = s.train;
  j["validation"] = s.validation;
  j["test"] = s.test;
  j["leftover"] = s.leftover;
  return j;
}

inline SplitAssignment split_from_json(const nlohmann::json& j) {
  SplitAssignment s;
  s.train = j.at("train").get<std::vector<std::string>>();
  s.validation = j.at("validation").get<std::vector<std::string>>();
  s.test = j.at("test").get<std::vector<std::string>>();
  if (j.contains("leftover")) s.leftover = j.at("leftover").get<std::vector<std::string>>();
  return s;
}

// Reviews whose id is in `ids`, in the order of `ids`.
inline Corpus subset(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::map<std::string, const LabeledReview*> by_id;
  for (const auto& r : corpus) by_id[r.id()] = &r;
  Corpus out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("id '" + id + "' not in corpus");
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace culture
