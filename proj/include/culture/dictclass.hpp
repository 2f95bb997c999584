#pragma once

// Dictionary-method classifier: word-count scoring with negation subtraction,
// training-frequency quotas, rank-based tri-class labels per dimension and a
// quota-constrained dominant-culture assignment.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "culture/corpus.hpp"
#include "culture/csv.hpp"
#include "culture/lexicon.hpp"
#include "culture/textprep.hpp"

namespace culture::dictclass {

struct ScoreVector {
  std::string review_id;
  std::array<double, 4> scores{};  // canonical dimension order
  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

// Share of content tokens found in the dictionary; hits in negated
// sentences count against it.
inline double score_review(const std::vector<textprep::TokenizedSentence>& sentences,
                           const lexicon::CultureDictionary& dict) {
  long total = 0, hits = 0;
  for (const auto& s : sentences) {
    total += static_cast<long>(s.tokens.size());
    for (const auto& t : s.tokens)
      if (dict.contains(t)) hits += s.negated ? -1 : 1;
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

using DictionarySet = std::array<lexicon::CultureDictionary, 4>;

inline ScoreVector score_text(const std::string& id, std::string_view text, const DictionarySet& dicts,
                              const textprep::PreprocessConfig& cfg) {
  auto sentences = textprep::preprocess(text, cfg);
  ScoreVector v{id, {}};
  for (auto d : kDimensions) v.scores[index_of(d)] = score_review(sentences, dicts[index_of(d)]);
  return v;
}

inline std::vector<ScoreVector> score_corpus(const Corpus& corpus, const DictionarySet& dicts,
                                             const textprep::PreprocessConfig& cfg = {}) {
  std::vector<ScoreVector> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus) out.push_back(score_text(r.review.id, r.review.composed_text, dicts, cfg));
  return out;
}

struct ClassQuota {
  std::array<double, 4> pos_share{};
  std::array<double, 4> neg_share{};
  std::array<double, 4> dominant_share{};
};

inline ClassQuota compute_quotas(const std::vector<LabelSet>& training) {
  if (training.empty()) throw Error("cannot compute quotas from an empty training set");
  ClassQuota q;
  const double n = static_cast<double>(training.size());
  std::array<long, 4> pos{}, neg{}, dom{};
  for (const auto& l : training) {
    for (auto d : kDimensions) {
      auto t = l.tri(d);
      if (t == TriLabel::positive) ++pos[index_of(d)];
      if (t == TriLabel::negative) ++neg[index_of(d)];
    }
    ++dom[index_of(l.dominant)];
  }
  for (int d = 0; d < 4; ++d) {
    q.pos_share[d] = pos[d] / n;
    q.neg_share[d] = neg[d] / n;
    q.dominant_share[d] = dom[d] / n;
  }
  return q;
}

// Hamilton apportionment of n over the shares; leftover seats go to the
// largest fractional parts, ties in canonical order.
inline std::array<std::size_t, 4> apportion(const std::array<double, 4>& shares, std::size_t n) {
  double sum = 0;
  for (double s : shares) {
    if (!(s >= 0)) throw Error("quota shares must be nonnegative");
    sum += s;
  }
  if (sum <= 0) throw Error("quota shares sum to zero");
  std::array<std::size_t, 4> k{};
  std::array<double, 4> frac{};
  std::size_t used = 0;
  for (int d = 0; d < 4; ++d) {
    double exact = shares[d] / sum * static_cast<double>(n);
    k[d] = static_cast<std::size_t>(std::floor(exact));
    frac[d] = exact - std::floor(exact);
    used += k[d];
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; used < n; ++i, ++used) ++k[order[i % 4]];
  return k;
}

struct ScoredItem {
  std::string id;
  double score = 0;
};

struct TriResult {
  std::vector<Label> labels;  // input order
  std::size_t k_pos = 0, k_neg = 0;
  bool clipped = false;  // k_pos + k_neg exceeded N and k_neg was reduced
};

// Ranks by (score desc, id asc): the first k_pos are positive, the last
// k_neg negative.
inline TriResult classify_tri(const std::vector<ScoredItem>& items, double pos_share, double neg_share) {
  if (items.empty()) throw Error("classify_tri needs at least one score");
  if (pos_share < 0 || neg_share < 0 || pos_share > 1 || neg_share > 1) throw Error("shares must lie in [0, 1]");
  const std::size_t n = items.size();
  TriResult r;
  r.k_pos = static_cast<std::size_t>(std::lround(pos_share * static_cast<double>(n)));
  r.k_neg = static_cast<std::size_t>(std::lround(neg_share * static_cast<double>(n)));
  if (r.k_pos + r.k_neg > n) {
    r.k_neg = n - r.k_pos;
    r.clipped = true;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].score != items[b].score) return items[a].score > items[b].score;
    return items[a].id < items[b].id;
  });
  r.labels.assign(n, code(TriLabel::neutral));
  for (std::size_t i = 0; i < r.k_pos; ++i) r.labels[order[i]] = code(TriLabel::positive);
  for (std::size_t i = n - r.k_neg; i < n; ++i) r.labels[order[i]] = code(TriLabel::negative);
  return r;
}

// Within-dimension mid-ranks, doubled to stay integral: 2·(#lower) + #equal + 1.
// Percentile = value / (2N).
inline std::vector<std::array<long, 4>> doubled_midranks(const std::vector<ScoreVector>& scores) {
  const std::size_t n = scores.size();
  std::vector<std::array<long, 4>> w(n);
  for (int d = 0; d < 4; ++d) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a].scores[d] < scores[b].scores[d]; });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && scores[order[j]].scores[d] == scores[order[i]].scores[d]) ++j;
      for (std::size_t k = i; k < j; ++k) w[order[k]][d] = static_cast<long>(2 * i + (j - i) + 1);
      i = j;
    }
  }
  return w;
}

enum class DominantStrategy { optimal, greedy };

inline std::string_view to_string(DominantStrategy s) { return s == DominantStrategy::optimal ? "optimal" : "greedy"; }

inline DominantStrategy parse_strategy(std::string_view s) {
  if (s == "optimal") return DominantStrategy::optimal;
  if (s == "greedy") return DominantStrategy::greedy;
  throw Error("unknown dominant strategy '" + std::string(s) + "'");
}

namespace detail {

// Reviews indexed in ascending id order.
inline std::vector<int> greedy_assign(const std::vector<std::array<long, 4>>& w, std::array<std::size_t, 4> quota) {
  struct Pair {
    long w;
    std::size_t r;
    int d;
  };
  std::vector<Pair> pairs;
  pairs.reserve(w.size() * 4);
  for (std::size_t r = 0; r < w.size(); ++r)
    for (int d = 0; d < 4; ++d) pairs.push_back({w[r][d], r, d});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.w != b.w) return a.w > b.w;
    if (a.r != b.r) return a.r < b.r;
    return a.d < b.d;
  });
  std::vector<int> out(w.size(), -1);
  for (const auto& p : pairs)
    if (out[p.r] < 0 && quota[p.d] > 0) {
      out[p.r] = p.d;
      --quota[p.d];
    }
  return out;
}

// Exchange graph over the four dimensions: edge a->b is the cheapest move of
// one movable review from a to b, priced as the weight it loses.
struct ExchangeGraph {
  static constexpr long kNone = std::numeric_limits<long>::max();
  std::array<std::array<long, 4>, 4> cost;
  std::array<std::array<std::size_t, 4>, 4> who;

  ExchangeGraph(const std::vector<std::array<long, 4>>& w, const std::vector<int>& assign, std::size_t first_movable,
                std::size_t skip = static_cast<std::size_t>(-1)) {
    for (auto& row : cost) row.fill(kNone);
    for (std::size_t r = first_movable; r < w.size(); ++r) {
      if (r == skip) continue;
      int a = assign[r];
      for (int b = 0; b < 4; ++b) {
        if (b == a) continue;
        long c = w[r][a] - w[r][b];
        if (c < cost[a][b]) {
          cost[a][b] = c;
          who[a][b] = r;
        }
      }
    }
  }

  // Cheapest simple path from -> to (from != to); empty when unreachable.
  std::pair<long, std::vector<int>> shortest_path(int from, int to) const {
    long best = kNone;
    std::vector<int> best_path;
    std::vector<int> mids;
    for (int x = 0; x < 4; ++x)
      if (x != from && x != to) mids.push_back(x);
    // Paths through 0, 1 or 2 intermediate nodes.
    std::vector<std::vector<int>> cands = {{from, to}};
    for (int m : mids) cands.push_back({from, m, to});
    if (mids.size() == 2) {
      cands.push_back({from, mids[0], mids[1], to});
      cands.push_back({from, mids[1], mids[0], to});
    }
    for (const auto& p : cands) {
      long c = 0;
      bool ok = true;
      for (std::size_t i = 0; i + 1 < p.size() && ok; ++i) {
        if (cost[p[i]][p[i + 1]] == kNone) ok = false;
        else c += cost[p[i]][p[i + 1]];
      }
      if (ok && c < best) {
        best = c;
        best_path = p;
      }
    }
    return {best, best_path};
  }

  // Most negative simple cycle; empty when none is negative.
  std::vector<int> negative_cycle() const {
    long best = 0;
    std::vector<int> best_cycle;
    std::array<int, 4> perm{0, 1, 2, 3};
    // Every simple cycle is a prefix of some permutation that starts at its
    // smallest node.
    do {
      long c = 0;
      for (int len = 1; len < 4; ++len) {
        if (cost[perm[len - 1]][perm[len]] == kNone) break;
        c += cost[perm[len - 1]][perm[len]];
        if (cost[perm[len]][perm[0]] == kNone) continue;
        long total = c + cost[perm[len]][perm[0]];
        if (total < best) {
          best = total;
          best_cycle.assign(perm.begin(), perm.begin() + len + 1);
        }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best_cycle;
  }
};

inline void apply_moves(const ExchangeGraph& g, const std::vector<int>& path, std::vector<int>& assign) {
  std::vector<std::size_t> movers;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) movers.push_back(g.who[path[i]][path[i + 1]]);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) assign[movers[i]] = path[i + 1];
}

// Maximum total weight under exact quotas; among optima, the assignment
// vector (reviews in id order) that is lexicographically smallest.
inline std::vector<int> optimal_assign(const std::vector<std::array<long, 4>>& w,
                                       const std::array<std::size_t, 4>& quota) {
  auto assign = greedy_assign(w, quota);
  for (;;) {
    ExchangeGraph g(w, assign, 0);
    auto cyc = g.negative_cycle();
    if (cyc.empty()) break;
    cyc.push_back(cyc.front());
    apply_moves(g, cyc, assign);
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int cur = assign[i];
    for (int d = 0; d < cur; ++d) {
      ExchangeGraph g(w, assign, i + 1);
      auto [c, path] = g.shortest_path(d, cur);
      if (path.empty()) continue;
      if (w[i][cur] - w[i][d] + c == 0) {
        apply_moves(g, path, assign);
        assign[i] = d;
        break;
      }
    }
  }
  return assign;
}

}  // namespace detail

struct DominantResult {
  std::vector<Label> labels;  // input order, dimension index
  std::array<std::size_t, 4> quota{};
};

inline DominantResult assign_dominant(const std::vector<ScoreVector>& scores, const std::array<double, 4>& shares,
                                      DominantStrategy strategy = DominantStrategy::optimal) {
  if (scores.empty()) throw Error("assign_dominant needs at least one review");
  const std::size_t n = scores.size();
  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), 0);
  std::stable_sort(by_id.begin(), by_id.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].review_id < scores[b].review_id; });
  auto ranks = doubled_midranks(scores);
  std::vector<std::array<long, 4>> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = ranks[by_id[i]];
  DominantResult res;
  res.quota = apportion(shares, n);
  auto assign = strategy == DominantStrategy::optimal ? detail::optimal_assign(w, res.quota)
                                                      : detail::greedy_assign(w, res.quota);
  res.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.labels[by_id[i]] = assign[i];
  return res;
}

struct Classification {
  std::vector<LabelSet> labels;  // input order
  std::array<bool, 4> clipped{};
  std::array<std::size_t, 4> dominant_quota{};
};

inline Classification classify(const std::vector<ScoreVector>& scores, const ClassQuota& quota,
                               DominantStrategy strategy = DominantStrategy::optimal) {
  Classification out;
  out.labels.resize(scores.size());
  for (auto d : kDimensions) {
    std::vector<ScoredItem> items;
    items.reserve(scores.size());
    for (const auto& s : scores) items.push_back({s.review_id, s.scores[index_of(d)]});
    auto tri = classify_tri(items, quota.pos_share[index_of(d)], quota.neg_share[index_of(d)]);
    out.clipped[index_of(d)] = tri.clipped;
    for (std::size_t i = 0; i < scores.size(); ++i) out.labels[i].set(task_of(d), tri.labels[i]);
  }
  auto dom = assign_dominant(scores, quota.dominant_share, strategy);
  out.dominant_quota = dom.quota;
  for (std::size_t i = 0; i < scores.size(); ++i) out.labels[i].set(Task::dominant, dom.labels[i]);
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline void write_scores_csv(std::ostream& out, const std::vector<ScoreVector>& scores) {
  csv::write_row(out, {"review_id", "clan", "adhocracy", "market", "hierarchy"});
  for (const auto& s : scores) {
    std::vector<std::string> row{s.review_id};
    for (double v : s.scores) row.push_back(format_double(v));
    csv::write_row(out, row);
  }
}

inline std::vector<ScoreVector> read_scores_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error("score file is empty");
  const std::vector<std::string> header{"review_id", "clan", "adhocracy", "market", "hierarchy"};
  if (rows[0].fields != header) throw Error("score file header must be review_id,clan,adhocracy,market,hierarchy");
  std::vector<ScoreVector> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() != 5) throw Error("line " + std::to_string(rows[i].line) + ": expected 5 fields");
    ScoreVector v{f[0], {}};
    for (int d = 0; d < 4; ++d) {
      const auto& s = f[d + 1];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v.scores[d]);
      if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("line " + std::to_string(rows[i].line) + ": bad score '" + s + "'");
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace culture::dictclass
