#pragma once

// Three-labeler annotation: records, majority vote with keyed tie-breaking,
// agreement statistics, and the labeling session state.

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "culture/core.hpp"
#include "culture/corpus.hpp"

namespace culture::annotate {

inline constexpr std::size_t kAnnotatorCount = 3;

class NotFound : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

struct AnnotationRecord {
  std::string review_id;
  std::string annotator_id;
  LabelSet labels;
  std::string timestamp;  // informational only
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

inline nlohmann::ordered_json to_json(const AnnotationRecord& r) {
  nlohmann::ordered_json j;
  j["review_id"] = r.review_id;
  j["annotator_id"] = r.annotator_id;
  j["labels"] = culture::to_json(r.labels);
  j["timestamp"] = r.timestamp;
  return j;
}

inline AnnotationRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("annotation record must be an object");
  AnnotationRecord r;
  for (const char* key : {"review_id", "annotator_id"})
    if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty())
      throw Error(std::string("annotation record missing '") + key + "'");
  r.review_id = j.at("review_id").get<std::string>();
  r.annotator_id = j.at("annotator_id").get<std::string>();
  if (!j.contains("labels")) throw Error("annotation record missing 'labels'");
  r.labels = label_set_from_json(j.at("labels"));
  if (j.contains("timestamp") && j.at("timestamp").is_string()) r.timestamp = j.at("timestamp").get<std::string>();
  return r;
}

inline std::vector<AnnotationRecord> read_records(std::istream& is) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<AnnotationRecord> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_records(in);
}

enum class Agreement { none = 0, two = 1, full = 2 };

inline constexpr std::string_view to_string(Agreement a) {
  switch (a) {
    case Agreement::none: return "none";
    case Agreement::two: return "two";
    case Agreement::full: return "full";
  }
  return "?";
}

struct Vote {
  Label label = 0;
  Agreement agreement = Agreement::full;
  bool tie_broken = false;
  friend bool operator==(const Vote&, const Vote&) = default;
};

// Majority of three votes; when all three differ one of them is drawn by a
// generator keyed on (seed, review_id, task), independent of vote order.
inline Vote majority_vote(const std::vector<Label>& votes, std::int64_t seed, std::string_view review_id,
                          std::string_view task) {
  if (votes.size() != kAnnotatorCount)
    throw Error("majority vote needs exactly 3 votes, got " + std::to_string(votes.size()));
  const Label a = votes[0], b = votes[1], c = votes[2];
  if (a == b && b == c) return {a, Agreement::full, false};
  if (a == b || a == c) return {a, Agreement::two, false};
  if (b == c) return {b, Agreement::two, false};
  std::vector<Label> sorted = votes;
  std::sort(sorted.begin(), sorted.end());
  auto eng = keyed_engine(seed, {review_id, task});
  return {sorted[bounded(eng, sorted.size())], Agreement::none, true};
}

struct AggregationResult {
  std::string review_id;
  LabelSet final;
  std::array<Agreement, 5> agreement{};   // indexed by Task
  std::array<bool, 5> tie_broken{};
  friend bool operator==(const AggregationResult&, const AggregationResult&) = default;
};

inline nlohmann::ordered_json to_json(const AggregationResult& r) {
  nlohmann::ordered_json j;
  j["review_id"] = r.review_id;
  j["labels"] = culture::to_json(r.final);
  nlohmann::ordered_json ag, tb;
  for (Task t : kTasks) {
    ag[std::string(to_string(t))] = std::string(to_string(r.agreement[static_cast<int>(t)]));
    tb[std::string(to_string(t))] = r.tie_broken[static_cast<int>(t)];
  }
  j["agreement"] = ag;
  j["tie_broken"] = tb;
  return j;
}

// Groups records per review (sorted by review id) and votes on each of the five
// tasks. Every review must have exactly three records from distinct annotators.
inline std::vector<AggregationResult> aggregate(const std::vector<AnnotationRecord>& records, std::int64_t seed) {
  std::map<std::string, std::vector<const AnnotationRecord*>> by_review;
  for (const auto& r : records) by_review[r.review_id].push_back(&r);
  std::vector<std::string> bad;
  for (auto& [id, recs] : by_review) {
    std::set<std::string> annotators;
    for (auto* r : recs) annotators.insert(r->annotator_id);
    if (recs.size() != kAnnotatorCount || annotators.size() != recs.size()) bad.push_back(id);
  }
  if (!bad.empty()) {
    std::string msg = "reviews without exactly 3 distinct annotator records:";
    for (const auto& id : bad) msg += " " + id;
    throw Error(msg);
  }
  std::vector<AggregationResult> out;
  for (const auto& [id, recs] : by_review) {
    AggregationResult res;
    res.review_id = id;
    for (Task t : kTasks) {
      std::vector<Label> votes;
      for (auto* r : recs) votes.push_back(r->labels.get(t));
      Vote v = majority_vote(votes, seed, id, to_string(t));
      res.final.set(t, v.label);
      res.agreement[static_cast<int>(t)] = v.agreement;
      res.tie_broken[static_cast<int>(t)] = v.tie_broken;
    }
    out.push_back(std::move(res));
  }
  return out;
}

// counts[task][agreement]
struct AgreementTable {
  std::array<std::array<std::size_t, 3>, 5> counts{};
  std::size_t count(Task t, Agreement a) const { return counts[static_cast<int>(t)][static_cast<int>(a)]; }
  std::size_t total(Task t) const {
    const auto& c = counts[static_cast<int>(t)];
    return c[0] + c[1] + c[2];
  }
};

inline AgreementTable agreement_table(const std::vector<AggregationResult>& results) {
  AgreementTable t;
  for (const auto& r : results)
    for (Task task : kTasks) ++t.counts[static_cast<int>(task)][static_cast<int>(r.agreement[static_cast<int>(task)])];
  return t;
}

// Text layout: rows no/two/full agreement and sum; columns the four dimensions
// then the dominant culture.
inline std::string render(const AgreementTable& t) {
  static constexpr std::array<Task, 5> cols = {Task::clan, Task::adhocracy, Task::market, Task::hierarchy,
                                               Task::dominant};
  static constexpr std::array<const char*, 5> headers = {"Clan", "Adhocracy", "Market", "Hierarchy",
                                                         "Dominant culture"};
  auto width = [](const char* h) { return std::max(6, static_cast<int>(std::string_view(h).size())); };
  std::ostringstream os;
  const int first = 20;
  os << std::left << std::setw(first) << "Type of agreement";
  for (auto h : headers) os << "  " << std::right << std::setw(width(h)) << h;
  os << '\n';
  auto row = [&](const char* name, auto value) {
    os << std::left << std::setw(first) << name;
    for (std::size_t i = 0; i < cols.size(); ++i) os << "  " << std::right << std::setw(width(headers[i])) << value(cols[i]);
    os << '\n';
  };
  row("No agreement", [&](Task c) { return t.count(c, Agreement::none); });
  row("Two labelers agree", [&](Task c) { return t.count(c, Agreement::two); });
  row("Full agreement", [&](Task c) { return t.count(c, Agreement::full); });
  row("Sum", [&](Task c) { return t.total(c); });
  return os.str();
}

inline nlohmann::ordered_json to_json(const AgreementTable& t) {
  nlohmann::ordered_json j;
  for (Task task : kTasks) {
    nlohmann::ordered_json col;
    col["none"] = t.count(task, Agreement::none);
    col["two"] = t.count(task, Agreement::two);
    col["full"] = t.count(task, Agreement::full);
    col["sum"] = t.total(task);
    j[std::string(to_string(task))] = col;
  }
  return j;
}

// Mean number of annotators voting for the modal label over every
// (review, task) pair in the given subsets.
inline double modal_agreement_mean(const std::vector<AnnotationRecord>& records,
                                   const std::vector<std::string>& review_ids, const std::vector<Task>& tasks) {
  if (review_ids.empty() || tasks.empty()) throw Error("modal agreement needs a nonempty subset");
  std::map<std::string, std::vector<const AnnotationRecord*>> by_review;
  for (const auto& r : records) by_review[r.review_id].push_back(&r);
  double sum = 0;
  std::size_t n = 0;
  for (const auto& id : review_ids) {
    auto it = by_review.find(id);
    if (it == by_review.end()) throw Error("no annotation records for review '" + id + "'");
    for (Task t : tasks) {
      std::map<Label, int> freq;
      for (auto* r : it->second) ++freq[r->labels.get(t)];
      int best = 0;
      for (auto [l, c] : freq) best = std::max(best, c);
      sum += best;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

// A labeling session: the reviews to label, the three annotators, and the
// records so far. Records are appended to a JSONL log when a path is set.
class Session {
 public:
  Session(std::vector<Review> reviews, std::vector<std::string> annotators, std::string log_path = {})
      : reviews_(std::move(reviews)), annotators_(std::move(annotators)), log_path_(std::move(log_path)) {
    if (annotators_.size() != kAnnotatorCount) throw Error("a session needs exactly 3 annotators");
    if (std::set<std::string>(annotators_.begin(), annotators_.end()).size() != kAnnotatorCount)
      throw Error("annotator ids must be distinct");
    std::sort(reviews_.begin(), reviews_.end(), [](const Review& a, const Review& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < reviews_.size(); ++i) {
      if (!index_.emplace(reviews_[i].id, i).second) throw Error("duplicate review id '" + reviews_[i].id + "'");
    }
    if (!log_path_.empty()) {
      std::ifstream in(log_path_, std::ios::binary);
      if (in)
        for (auto& r : read_records(in)) insert(std::move(r), false);
    }
  }

  const std::vector<std::string>& annotators() const { return annotators_; }
  const std::vector<Review>& reviews() const { return reviews_; }

  bool knows_annotator(const std::string& a) const {
    return std::find(annotators_.begin(), annotators_.end(), a) != annotators_.end();
  }

  // Unlabeled review for this annotator: least annotated overall, then by id.
  std::optional<Review> next_item(const std::string& annotator) const {
    std::lock_guard lock(mu_);
    if (!knows_annotator(annotator)) throw NotFound("unknown annotator '" + annotator + "'");
    const Review* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& r : reviews_) {
      auto it = by_review_.find(r.id);
      std::size_t count = it == by_review_.end() ? 0 : it->second.size();
      if (it != by_review_.end() && it->second.count(annotator)) continue;
      if (!best || count < best_count) {
        best = &r;
        best_count = count;
      }
    }
    if (!best) return std::nullopt;
    return *best;
  }

  // Validates and stores a record, appending it to the log.
  void submit(AnnotationRecord rec) { insert(std::move(rec), true); }

  std::vector<AnnotationRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  std::vector<AnnotationRecord> records_for(const std::string& review_id) const {
    std::lock_guard lock(mu_);
    std::vector<AnnotationRecord> out;
    for (const auto& r : records_)
      if (r.review_id == review_id) out.push_back(r);
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.annotator_id < b.annotator_id; });
    return out;
  }

  bool has_review(const std::string& id) const { return index_.count(id) > 0; }

  // Records of fully labeled reviews only.
  std::vector<AnnotationRecord> complete_records() const {
    std::lock_guard lock(mu_);
    std::vector<AnnotationRecord> out;
    for (const auto& r : records_)
      if (by_review_.at(r.review_id).size() == kAnnotatorCount) out.push_back(r);
    return out;
  }

  nlohmann::ordered_json progress() const {
    std::lock_guard lock(mu_);
    nlohmann::ordered_json j;
    j["reviews"] = reviews_.size();
    j["records"] = records_.size();
    std::size_t complete = 0;
    for (const auto& [id, set] : by_review_) complete += set.size() == kAnnotatorCount;
    j["complete_reviews"] = complete;
    nlohmann::ordered_json per;
    for (const auto& a : annotators_) {
      std::size_t n = 0;
      for (const auto& r : records_) n += r.annotator_id == a;
      per[a] = n;
    }
    j["per_annotator"] = per;
    return j;
  }

 private:
  void insert(AnnotationRecord rec, bool persist) {
    std::lock_guard lock(mu_);
    if (!index_.count(rec.review_id)) throw NotFound("unknown review '" + rec.review_id + "'");
    if (!knows_annotator(rec.annotator_id)) throw NotFound("unknown annotator '" + rec.annotator_id + "'");
    auto& set = by_review_[rec.review_id];
    if (set.count(rec.annotator_id))
      throw Conflict("duplicate record for review '" + rec.review_id + "' by '" + rec.annotator_id + "'");
    if (persist && !log_path_.empty()) {
      std::ofstream out(log_path_, std::ios::binary | std::ios::app);
      if (!out) throw Error("cannot append to '" + log_path_ + "'");
      out << to_json(rec).dump() << '\n';
    }
    set.insert(rec.annotator_id);
    records_.push_back(std::move(rec));
  }

  std::vector<Review> reviews_;
  std::vector<std::string> annotators_;
  std::string log_path_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::set<std::string>> by_review_;
  std::vector<AnnotationRecord> records_;
  mutable std::mutex mu_;
};

}  // namespace culture::annotate
