#pragma once

// Synthetic labeled reviews for end-to-end runs. Each review mixes culture
// vocabulary, paraphrases that avoid it, negated sentences and neutral filler.
// Review i depends only on (seed, i), so a smaller corpus is a prefix of a
// larger one.

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "culture/annotate.hpp"
#include "culture/core.hpp"
#include "culture/corpus.hpp"

namespace culture::synth {

struct Options {
  std::size_t n = 600;
  std::int64_t seed = 1;
  bool annotations = false;
  double annotator_accuracy = 0.8;
  std::array<double, 4> dominant_shares = {0.30, 0.15, 0.35, 0.20};
  double paraphrase_rate = 0.3;
};

struct Result {
  Corpus corpus;
  std::vector<annotate::AnnotationRecord> records;
};

namespace vocab {

using List = std::vector<const char*>;

inline const std::array<List, 4>& terms() {
  static const std::array<List, 4> t = {{
      {"teamwork", "trust", "support", "collaboration", "commitment", "participation", "employee involvement",
       "open communication", "employee satisfaction", "affiliation", "attachment"},
      {"innovation", "creativity", "autonomy", "growth", "variety", "risk-taking", "adaptability",
       "attention to detail", "stimulation"},
      {"competition", "achievement", "productivity", "profit", "goal-setting", "planning", "competitiveness",
       "task focus", "product quality", "increased market share", "competence"},
      {"consistency", "efficiency", "predictability", "conformity", "formalization", "timeliness",
       "smooth functioning", "routinization"},
  }};
  return t;
}

inline const List& positive_templates() {
  static const List t = {"The company really values %s.", "Management puts a lot of emphasis on %s.",
                         "You will find plenty of %s here.", "Leadership rewards %s.",
                         "Day to day work is all about %s."};
  return t;
}

inline const List& negative_templates() {
  static const List t = {"There is no %s at this company.", "Management does not care about %s.",
                         "Never expect any %s here.", "Do not count on %s."};
  return t;
}

inline const std::array<List, 4>& positive_paraphrases() {
  static const std::array<List, 4> t = {{
      {"People here genuinely care about you.", "It feels like a family.", "Coworkers watch out for each other.",
       "Managers listen to what we say."},
      {"We get to try bold new ideas.", "Every month brings fresh projects to explore.",
       "You can shape your own role.", "Experiments are welcome."},
      {"Everyone is pushed to outsell the rest.", "Sales quotas drive everything.",
       "Winning is all anyone cares about.", "Results are what count."},
      {"Every step follows a strict procedure.", "Rules and paperwork govern every decision.",
       "Approvals go through several layers.", "Everything is done by the book."},
  }};
  return t;
}

inline const std::array<List, 4>& negative_paraphrases() {
  static const std::array<List, 4> t = {{
      {"They are quick to throw you under the bus.", "Everyone is on their own.",
       "Coworkers backstab each other.", "Managers play favorites."},
      {"Ideas from staff get ignored.", "The place is stuck in the past.", "Very slow to adopt new tools.",
       "Bold moves are frowned upon."},
      {"Results hardly mean anything to anyone.", "Deadlines slide and everyone shrugs.", "Sales figures are an afterthought.",
       "Quotas are a joke."},
      {"Chaos rules the office.", "Procedures change every week.", "Every manager makes up their own rules.",
       "Paperwork gets lost all the time."},
  }};
  return t;
}

inline const List& filler() {
  static const List t = {"The cafeteria food is decent.",  "Parking is easy to find.",
                         "The office is close to the train station.", "Pay is about average for the area.",
                         "The building has nice views.",   "Hours are normal.",
                         "I worked here for two years.",   "The commute is long.",
                         "Coffee is free.",                "The dress code is casual."};
  return t;
}

}  // namespace vocab

namespace detail {

template <class Engine>
const char* pick(const vocab::List& l, Engine& eng) {
  return l[bounded(eng, l.size())];
}

inline std::string fill(const char* tmpl, const char* word) {
  char buf[256];
  std::snprintf(buf, sizeof buf, tmpl, word);
  return buf;
}

// 53-bit uniform in [0,1); unlike std::uniform_real_distribution it is the
// same on every standard library.
template <class Engine>
double unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <class Engine>
bool chance(Engine& eng, double p) {
  return unit(eng) < p;
}

template <class Engine>
std::string signal_sentence(int d, bool positive, double paraphrase_rate, Engine& eng) {
  if (chance(eng, paraphrase_rate))
    return pick(positive ? vocab::positive_paraphrases()[d] : vocab::negative_paraphrases()[d], eng);
  const char* word = pick(vocab::terms()[d], eng);
  return fill(pick(positive ? vocab::positive_templates() : vocab::negative_templates(), eng), word);
}

template <class Engine>
Dimension draw_dominant(const std::array<double, 4>& shares, Engine& eng) {
  double u = detail::unit(eng);
  double acc = 0;
  for (int d = 0; d < 4; ++d) {
    acc += shares[d];
    if (u < acc) return kDimensions[d];
  }
  return kDimensions[3];
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

}  // namespace detail

inline std::string review_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn-%05zu", i);
  return buf;
}

inline LabeledReview make_review(std::size_t i, const Options& opt) {
  auto id = review_id(i);
  auto eng = keyed_engine(opt.seed, {"synth", id});
  LabelSet labels;
  labels.dominant = detail::draw_dominant(opt.dominant_shares, eng);
  std::vector<std::string> pros, cons;
  for (Dimension d : kDimensions) {
    int di = index_of(d);
    if (d == labels.dominant) {
      labels.tri(d) = TriLabel::positive;
      pros.push_back(detail::signal_sentence(di, true, opt.paraphrase_rate, eng));
      pros.push_back(detail::signal_sentence(di, true, opt.paraphrase_rate, eng));
      continue;
    }
    double u = detail::unit(eng);
    if (u < 0.70) {
      labels.tri(d) = TriLabel::neutral;
    } else if (u < 0.85) {
      labels.tri(d) = TriLabel::positive;
      pros.push_back(detail::signal_sentence(di, true, opt.paraphrase_rate, eng));
    } else {
      labels.tri(d) = TriLabel::negative;
      cons.push_back(detail::signal_sentence(di, false, opt.paraphrase_rate, eng));
    }
  }
  std::size_t fillers = 1 + bounded(eng, 3);
  for (std::size_t k = 0; k < fillers; ++k) (detail::chance(eng, 0.5) ? pros : cons).push_back(detail::pick(vocab::filler(), eng));
  seeded_shuffle(pros, eng);
  seeded_shuffle(cons, eng);
  LabeledReview r;
  r.review.id = id;
  r.review.sections = {detail::join(pros), detail::join(cons)};
  if (detail::chance(eng, 0.3)) r.review.sections.push_back(detail::pick(vocab::filler(), eng));
  r.review.compose(opt.seed);
  r.labels = labels;
  return r;
}

// Three annotators; each copies the gold label with probability
// annotator_accuracy and otherwise picks one of the other labels uniformly.
inline std::vector<annotate::AnnotationRecord> make_annotations(const LabeledReview& r, const Options& opt) {
  std::vector<annotate::AnnotationRecord> out;
  for (std::size_t a = 0; a < annotate::kAnnotatorCount; ++a) {
    std::string annotator = "annotator-" + std::to_string(a + 1);
    auto eng = keyed_engine(opt.seed, {"synth-annotation", r.id(), annotator});
    annotate::AnnotationRecord rec;
    rec.review_id = r.id();
    rec.annotator_id = annotator;
    for (Task t : kTasks) {
      Label gold = r.labels->get(t);
      Label l = gold;
      if (!detail::chance(eng, opt.annotator_accuracy)) {
        std::vector<Label> others;
        for (Label x : label_domain(t))
          if (x != gold) others.push_back(x);
        l = others[bounded(eng, others.size())];
      }
      rec.labels.set(t, l);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline Result synthesize(const Options& opt) {
  if (opt.n == 0) throw Error("synth needs n > 0");
  double total = 0;
  for (double s : opt.dominant_shares) {
    if (s < 0) throw Error("dominant shares must be nonnegative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("dominant shares must sum to 1");
  if (!(opt.annotator_accuracy >= 0 && opt.annotator_accuracy <= 1)) throw Error("annotator accuracy must lie in [0,1]");
  Result res;
  res.corpus.reserve(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i) {
    res.corpus.push_back(make_review(i, opt));
    if (opt.annotations)
      for (auto& rec : make_annotations(res.corpus.back(), opt)) res.records.push_back(std::move(rec));
  }
  return res;
}

}  // namespace culture::synth
