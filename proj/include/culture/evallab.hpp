#pragma once

// Accuracy, baselines, report tables and the error-analysis helpers.

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "culture/core.hpp"
#include "culture/corpus.hpp"
#include "culture/csv.hpp"
#include "culture/lexicon.hpp"
#include "culture/textprep.hpp"

namespace culture::evallab {

using TaskLabels = std::map<std::string, Label>;  // review id -> label
using Gold = std::map<Task, TaskLabels>;

inline Gold gold_from_corpus(const Corpus& corpus) {
  Gold g;
  for (const auto& r : corpus) {
    if (!r.labels) continue;
    for (Task t : kTasks) g[t][r.id()] = r.labels->get(t);
  }
  return g;
}

// Labels as strings: "-1"/"0"/"1" for tri tasks, dimension names for dominant.
inline Label parse_label(Task t, const std::string& s) {
  if (!is_tri(t)) return index_of(dimension_or_throw(s));
  if (s == "-1" || s == "0" || s == "1" || s == "+1") return std::stoi(s);
  throw Error("label '" + s + "' outside domain of task " + std::string(to_string(t)));
}

inline Label label_from_json(Task t, const nlohmann::json& j) {
  Label l;
  if (j.is_string()) {
    l = parse_label(t, j.get<std::string>());
  } else if (j.is_number_integer()) {
    l = j.get<int>();
  } else {
    throw Error("label must be an integer or a string");
  }
  if (!in_domain(t, l)) throw Error("label " + std::to_string(l) + " outside domain of task " + std::string(to_string(t)));
  return l;
}

inline nlohmann::ordered_json label_to_json(Task t, Label l) {
  if (is_tri(t)) return l;
  return std::string(to_string(static_cast<Dimension>(l)));
}

// --- prediction sets -------------------------------------------------------

struct PredictionSet {
  std::string method;
  std::map<Task, TaskLabels> tasks;

  bool covers(Task t) const { return tasks.count(t) > 0 && !tasks.at(t).empty(); }
  void add(Task t, const std::string& id, Label l) {
    if (!in_domain(t, l)) throw Error("label " + std::to_string(l) + " outside domain of task " + std::string(to_string(t)));
    if (!tasks[t].emplace(id, l).second)
      throw Error("method '" + method + "' has two predictions for review '" + id + "' in task " +
                  std::string(to_string(t)));
  }
};

// Sets appear in order of first mention.
inline std::vector<PredictionSet> read_predictions(std::istream& is) {
  std::vector<PredictionSet> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto method = j.at("method").get<std::string>();
      Task t = task_or_throw(j.at("task").get<std::string>());
      auto [it, fresh] = index.emplace(method, out.size());
      if (fresh) out.push_back({method, {}});
      out[it->second].add(t, j.at("review_id").get<std::string>(), label_from_json(t, j.at("label")));
    } catch (const nlohmann::json::exception& e) {
      throw Error("predictions line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("predictions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<PredictionSet> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions file '" + path + "'");
  return read_predictions(in);
}

inline void write_predictions(std::ostream& os, const PredictionSet& set) {
  for (Task t : kTasks) {
    auto it = set.tasks.find(t);
    if (it == set.tasks.end()) continue;
    for (const auto& [id, l] : it->second) {
      nlohmann::ordered_json j;
      j["method"] = set.method;
      j["task"] = std::string(to_string(t));
      j["review_id"] = id;
      j["label"] = label_to_json(t, l);
      os << j.dump() << '\n';
    }
  }
}

// --- accuracy and baselines ----------------------------------------------

inline double accuracy(const TaskLabels& predictions, const TaskLabels& gold) {
  if (gold.empty()) throw Error("no gold labels");
  std::vector<std::string> missing;
  std::size_t hits = 0;
  for (const auto& [id, g] : gold) {
    auto it = predictions.find(id);
    if (it == predictions.end()) {
      missing.push_back(id);
      continue;
    }
    hits += it->second == g;
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " gold ids without prediction:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ...";
    throw Error(msg);
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

inline double expected_random(std::size_t classes) {
  if (classes == 0) throw Error("task without classes");
  return 1.0 / static_cast<double>(classes);
}

inline double expected_random(Task t) { return expected_random(label_domain(t).size()); }

// Modal label; ties go to the earlier label in canonical order.
inline Label majority_label(Task t, const std::vector<Label>& training) {
  if (training.empty()) throw Error("majority baseline needs training labels");
  auto domain = label_domain(t);
  std::vector<std::size_t> freq(domain.size(), 0);
  for (Label l : training) {
    auto it = std::find(domain.begin(), domain.end(), l);
    if (it == domain.end()) throw Error("label " + std::to_string(l) + " outside domain of task " + std::string(to_string(t)));
    ++freq[it - domain.begin()];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < domain.size(); ++i)
    if (freq[i] > freq[best]) best = i;
  return domain[best];
}

inline Label majority_label(Task t, const TaskLabels& training) {
  std::vector<Label> v;
  for (const auto& [id, l] : training) v.push_back(l);
  return majority_label(t, v);
}

inline TaskLabels constant_predictions(const TaskLabels& ids, Label l) {
  TaskLabels out;
  for (const auto& [id, _] : ids) out[id] = l;
  return out;
}

// Seeded uniform draw per review; the sampled alternative to 1/K.
inline TaskLabels random_predictions(Task t, const TaskLabels& ids, std::int64_t seed) {
  auto domain = label_domain(t);
  auto eng = keyed_engine(seed, {"random-baseline", to_string(t)});
  TaskLabels out;
  for (const auto& [id, _] : ids) out[id] = domain[bounded(eng, domain.size())];
  return out;
}

// --- report ----------------------------------------------------------------

struct ReportRow {
  std::string method;
  std::array<std::optional<double>, 5> cells;  // kReportTaskOrder
};

struct EvalReport {
  std::vector<ReportRow> rows;
};

struct Baselines {
  std::optional<Gold> training;              // majority row when present
  std::optional<std::int64_t> random_seed;  // sampled random row instead of 1/K
};

inline EvalReport build_report(const std::vector<PredictionSet>& sets, const Gold& gold, const Baselines& base = {}) {
  if (sets.empty()) throw Error("report needs at least one prediction set");
  auto gold_for = [&](Task t) -> const TaskLabels* {
    auto it = gold.find(t);
    return it == gold.end() || it->second.empty() ? nullptr : &it->second;
  };
  EvalReport rep;
  ReportRow random{base.random_seed ? "Random (sampled)" : "Random", {}};
  for (std::size_t c = 0; c < 5; ++c) {
    Task t = kReportTaskOrder[c];
    if (!base.random_seed)
      random.cells[c] = expected_random(t);
    else if (auto g = gold_for(t))
      random.cells[c] = accuracy(random_predictions(t, *g, *base.random_seed), *g);
  }
  rep.rows.push_back(random);
  if (base.training) {
    ReportRow maj{"Majority class", {}};
    for (std::size_t c = 0; c < 5; ++c) {
      Task t = kReportTaskOrder[c];
      auto g = gold_for(t);
      auto tr = base.training->find(t);
      if (!g || tr == base.training->end() || tr->second.empty()) continue;
      maj.cells[c] = accuracy(constant_predictions(*g, majority_label(t, tr->second)), *g);
    }
    rep.rows.push_back(maj);
  }
  for (const auto& s : sets) {
    ReportRow row{s.method, {}};
    for (std::size_t c = 0; c < 5; ++c) {
      Task t = kReportTaskOrder[c];
      auto g = gold_for(t);
      if (!g || !s.covers(t)) continue;
      try {
        row.cells[c] = accuracy(s.tasks.at(t), *g);
      } catch (const Error& e) {
        throw Error("method '" + s.method + "', task " + std::string(to_string(t)) + ": " + e.what());
      }
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

inline std::string format_cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

inline constexpr std::array<const char*, 5> kReportHeaders = {"Dominant culture", "Clan", "Adhocracy", "Market",
                                                              "Hierarchy"};

inline std::string render_text(const EvalReport& rep) {
  std::size_t first = std::string_view("Method").size();
  for (const auto& r : rep.rows) first = std::max(first, r.method.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(first)) << "Method";
  for (auto h : kReportHeaders) os << "  " << std::right << std::setw(static_cast<int>(std::string_view(h).size())) << h;
  os << '\n';
  for (const auto& r : rep.rows) {
    std::ostringstream line;
    line << std::left << std::setw(static_cast<int>(first)) << r.method;
    for (std::size_t c = 0; c < 5; ++c)
      line << "  " << std::right << std::setw(static_cast<int>(std::string_view(kReportHeaders[c]).size()))
           << format_cell(r.cells[c]);
    auto s = line.str();
    while (!s.empty() && s.back() == ' ') s.pop_back();
    os << s << '\n';
  }
  return os.str();
}

inline std::string render_csv(const EvalReport& rep) {
  std::ostringstream os;
  csv::Row header = {"method"};
  for (Task t : kReportTaskOrder) header.emplace_back(to_string(t));
  csv::write_row(os, header);
  for (const auto& r : rep.rows) {
    csv::Row row = {r.method};
    for (const auto& c : r.cells) row.push_back(format_cell(c));
    csv::write_row(os, row);
  }
  return os.str();
}

// --- error analysis --------------------------------------------------------

enum class Reason {
  wording_without_dictionary_words,
  dictionary_words_different_context,
  opposite_meaning_not_captured,
  other,
  untagged
};

inline constexpr std::array<Reason, 4> kReasons = {Reason::wording_without_dictionary_words,
                                                   Reason::dictionary_words_different_context,
                                                   Reason::opposite_meaning_not_captured, Reason::other};

inline constexpr std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::wording_without_dictionary_words: return "wording_without_dictionary_words";
    case Reason::dictionary_words_different_context: return "dictionary_words_different_context";
    case Reason::opposite_meaning_not_captured: return "opposite_meaning_not_captured";
    case Reason::other: return "other";
    case Reason::untagged: return "untagged";
  }
  return "?";
}

inline constexpr std::string_view display_name(Reason r) {
  switch (r) {
    case Reason::wording_without_dictionary_words: return "Wording without words from dictionary";
    case Reason::dictionary_words_different_context: return "Words from dictionary in different context";
    case Reason::opposite_meaning_not_captured: return "Did not capture opposite meaning";
    case Reason::other: return "Other";
    case Reason::untagged: return "Untagged";
  }
  return "?";
}

inline Reason parse_reason(std::string_view s) {
  if (s.empty()) return Reason::untagged;
  for (Reason r : {Reason::wording_without_dictionary_words, Reason::dictionary_words_different_context,
                   Reason::opposite_meaning_not_captured, Reason::other, Reason::untagged})
    if (to_string(r) == s) return r;
  throw Error("unknown reason tag '" + std::string(s) + "'");
}

struct Hit {
  std::string stem;
  textprep::Span span;
  friend bool operator==(const Hit&, const Hit&) = default;
};

inline std::vector<Hit> dictionary_hits(std::string_view text, const lexicon::CultureDictionary& dict,
                                        textprep::StemmerKind kind = textprep::StemmerKind::porter) {
  std::vector<Hit> out;
  for (const auto& tok : textprep::tokenize_spans(text)) {
    auto st = textprep::content_stem(tok.text, kind);
    if (dict.contains(st)) out.push_back({st, tok.span});
  }
  return out;
}

inline std::string highlight(std::string_view text, const std::vector<Hit>& hits) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& h : hits) {
    out.append(text.substr(pos, h.span.begin - pos));
    out += "**";
    out.append(text.substr(h.span.begin, h.span.size()));
    out += "**";
    pos = h.span.end;
  }
  out.append(text.substr(pos));
  return out;
}

inline std::string highlight_hits(std::string_view text, const lexicon::CultureDictionary& dict,
                                  textprep::StemmerKind kind = textprep::StemmerKind::porter) {
  return highlight(text, dictionary_hits(text, dict, kind));
}

inline std::string strip_markers(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '*' && i + 1 < text.size() && text[i + 1] == '*') {
      ++i;
      continue;
    }
    out += text[i];
  }
  return out;
}

struct ErrorCase {
  std::string review_id;
  Task task = Task::clan;
  Label gold = 0;
  Label pred_a = 0;
  Label pred_b = 0;
  std::size_t word_count = 0;
  std::string text;
  std::vector<Hit> hits;
  Reason reason = Reason::untagged;

  friend bool operator==(const ErrorCase&, const ErrorCase&) = default;
};

// Reviews where A agrees with gold, B does not, and the composed text has
// fewer than max_words words. Ordered by review id.
inline std::vector<ErrorCase> select_error_cases(const PredictionSet& a, const PredictionSet& b, const Gold& gold,
                                                 const Corpus& reviews, Task task, std::size_t max_words = 50) {
  auto git = gold.find(task);
  if (git == gold.end() || git->second.empty()) throw Error("no gold labels for task " + std::string(to_string(task)));
  for (const auto* s : {&a, &b})
    if (!s->covers(task)) throw Error("method '" + s->method + "' has no predictions for task " + std::string(to_string(task)));
  std::map<std::string, const Review*> by_id;
  for (const auto& r : reviews) by_id[r.id()] = &r.review;
  const auto& pa = a.tasks.at(task);
  const auto& pb = b.tasks.at(task);
  std::vector<std::string> gaps;
  std::vector<ErrorCase> out;
  for (const auto& [id, g] : git->second) {
    auto ia = pa.find(id), ib = pb.find(id);
    auto ir = by_id.find(id);
    if (ia == pa.end() || ib == pb.end() || ir == by_id.end()) {
      gaps.push_back(id);
      continue;
    }
    if (ia->second != g || ib->second == g) continue;
    if (ir->second->word_count >= max_words) continue;
    ErrorCase c;
    c.review_id = id;
    c.task = task;
    c.gold = g;
    c.pred_a = ia->second;
    c.pred_b = ib->second;
    c.word_count = ir->second->word_count;
    c.text = ir->second->composed_text;
    out.push_back(std::move(c));
  }
  if (!gaps.empty()) {
    std::string msg = std::to_string(gaps.size()) + " gold ids missing from a method or the review set:";
    for (std::size_t i = 0; i < gaps.size() && i < 10; ++i) msg += " " + gaps[i];
    throw Error(msg);
  }
  return out;
}

inline void attach_hits(std::vector<ErrorCase>& cases, const lexicon::CultureDictionary& dict,
                        textprep::StemmerKind kind = textprep::StemmerKind::porter) {
  for (auto& c : cases) c.hits = dictionary_hits(c.text, dict, kind);
}

inline std::string encode_hits(const std::vector<Hit>& hits) {
  std::string out;
  for (const auto& h : hits) {
    if (!out.empty()) out += ';';
    out += h.stem + "@" + std::to_string(h.span.begin) + "-" + std::to_string(h.span.end);
  }
  return out;
}

inline std::vector<Hit> decode_hits(const std::string& s) {
  std::vector<Hit> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto at = item.rfind('@');
    auto dash = item.rfind('-');
    if (at == std::string::npos || dash == std::string::npos || dash < at) throw Error("malformed hit '" + item + "'");
    Hit h;
    h.stem = item.substr(0, at);
    h.span.begin = std::stoul(item.substr(at + 1, dash - at - 1));
    h.span.end = std::stoul(item.substr(dash + 1));
    out.push_back(std::move(h));
  }
  return out;
}

inline const csv::Row kErrorCaseHeader = {"review_id", "task", "gold",  "pred_a", "pred_b",
                                          "word_count", "hits", "text", "reason"};

inline void write_error_cases(std::ostream& os, const std::vector<ErrorCase>& cases) {
  csv::write_row(os, kErrorCaseHeader);
  for (const auto& c : cases)
    csv::write_row(os, {c.review_id, std::string(to_string(c.task)), label_to_string(c.task, c.gold),
                        label_to_string(c.task, c.pred_a), label_to_string(c.task, c.pred_b),
                        std::to_string(c.word_count), encode_hits(c.hits), c.text, std::string(to_string(c.reason))});
}

inline std::vector<ErrorCase> read_error_cases(std::istream& is) {
  auto records = csv::read_all(is);
  if (records.empty()) throw Error("error case file is empty");
  const auto& header = records.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& name : kErrorCaseHeader)
    if (name != "reason" && !col.count(name)) throw Error("error case file lacks column '" + name + "'");
  std::vector<ErrorCase> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    auto get = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      return it == col.end() || it->second >= f.size() ? std::string() : f[it->second];
    };
    try {
      ErrorCase c;
      c.review_id = get("review_id");
      c.task = task_or_throw(get("task"));
      c.gold = parse_label(c.task, get("gold"));
      c.pred_a = parse_label(c.task, get("pred_a"));
      c.pred_b = parse_label(c.task, get("pred_b"));
      c.word_count = std::stoul(get("word_count"));
      c.hits = decode_hits(get("hits"));
      c.text = get("text");
      c.reason = parse_reason(get("reason"));
      out.push_back(std::move(c));
    } catch (const std::exception& e) {
      throw Error("error case line " + std::to_string(records[r].line) + ": " + e.what());
    }
  }
  return out;
}

// Integer percentages by largest remainder; equal remainders go to the
// earlier reason.
inline std::array<int, 4> percent_shares(const std::array<std::size_t, 4>& counts) {
  std::size_t n = counts[0] + counts[1] + counts[2] + counts[3];
  std::array<int, 4> out{};
  if (n == 0) return out;
  std::array<std::size_t, 4> rem{};
  int given = 0;
  for (int i = 0; i < 4; ++i) {
    out[i] = static_cast<int>(counts[i] * 100 / n);
    rem[i] = counts[i] * 100 % n;
    given += out[i];
  }
  std::array<int, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; given < 100; ++k, ++given) ++out[order[k]];
  return out;
}

struct ReasonBlock {
  Task task = Task::clan;
  std::size_t n = 0;
  std::array<std::size_t, 4> counts{};
  std::array<int, 4> shares{};
  std::array<std::optional<ErrorCase>, 4> examples;  // shortest case per reason
};

struct ReasonTable {
  std::vector<ReasonBlock> blocks;  // the four dimensions, then dominant if present
};

inline ReasonTable reason_table(const std::vector<ErrorCase>& cases) {
  std::vector<std::string> untagged;
  for (const auto& c : cases)
    if (c.reason == Reason::untagged) untagged.push_back(c.review_id + "/" + std::string(to_string(c.task)));
  if (!untagged.empty()) {
    std::string msg = std::to_string(untagged.size()) + " untagged cases:";
    for (std::size_t i = 0; i < untagged.size() && i < 10; ++i) msg += " " + untagged[i];
    throw Error(msg);
  }
  ReasonTable t;
  for (Task task : kTasks) {
    ReasonBlock b;
    b.task = task;
    for (const auto& c : cases) {
      if (c.task != task) continue;
      ++b.n;
      int r = static_cast<int>(c.reason);
      ++b.counts[r];
      auto& ex = b.examples[r];
      if (!ex || c.word_count < ex->word_count || (c.word_count == ex->word_count && c.review_id < ex->review_id))
        ex = c;
    }
    b.shares = percent_shares(b.counts);
    if (task != Task::dominant || b.n > 0) t.blocks.push_back(std::move(b));
  }
  return t;
}

inline std::string classification_name(Task t, Label l) {
  if (!is_tri(t)) return std::string(to_string(static_cast<Dimension>(l)));
  return l > 0 ? "positive" : l < 0 ? "negative" : "neutral";
}

inline std::string render_text(const ReasonTable& t, const std::string& name_a = "A", const std::string& name_b = "B") {
  std::ostringstream os;
  os << "Culture dimension\tNo. of reviews\tReason\tShare of reviews\tExample\t" << name_a << '\t' << name_b << '\n';
  for (const auto& b : t.blocks) {
    std::string dim = b.task == Task::dominant ? "Dominant culture" : std::string(display_name(dimension_of(b.task)));
    for (int r = 0; r < 4; ++r) {
      if (r == 0)
        os << dim << '\t' << b.n;
      else
        os << '\t';
      os << '\t' << display_name(kReasons[r]) << '\t';
      if (b.n) os << b.shares[r] << '%';
      else os << '-';
      os << '\t';
      if (const auto& ex = b.examples[r]) {
        std::string text = highlight(ex->text, ex->hits);
        for (char& ch : text)
          if (ch == '\n' || ch == '\t') ch = ' ';
        os << text << '\t' << classification_name(ex->task, ex->pred_a) << '\t'
           << classification_name(ex->task, ex->pred_b);
      } else {
        os << "\t\t";
      }
      os << '\n';
    }
  }
  return os.str();
}

inline nlohmann::ordered_json to_json(const ReasonTable& t) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& b : t.blocks) {
    nlohmann::ordered_json bj;
    bj["task"] = std::string(to_string(b.task));
    bj["n"] = b.n;
    nlohmann::ordered_json shares, counts;
    for (int r = 0; r < 4; ++r) {
      counts[std::string(to_string(kReasons[r]))] = b.counts[r];
      shares[std::string(to_string(kReasons[r]))] = b.shares[r];
    }
    bj["counts"] = counts;
    bj["shares"] = shares;
    j.push_back(bj);
  }
  return j;
}

}  // namespace culture::evallab
