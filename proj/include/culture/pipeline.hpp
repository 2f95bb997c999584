#pragma once

// Glue shared by the CLI and the end-to-end checks: default dictionaries,
// and whole-corpus prediction with each method.

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "culture/corpus.hpp"
#include "culture/dictclass.hpp"
#include "culture/evallab.hpp"
#include "culture/lexicon.hpp"
#include "culture/tfidf.hpp"
#include "culture/wordnet.hpp"

namespace culture::pipeline {

// Flag value, then CULTURE_WORDNET_DIR, then the bundled mini lexicon.
inline std::filesystem::path wordnet_dir(const std::string& flag = "") {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CULTURE_WORDNET_DIR"); env && *env) return env;
  return lexicon::default_data_dir() / "wordnet-mini";
}

inline std::filesystem::path default_exclusions_path() {
  return lexicon::default_data_dir() / "exclusions" / "problematic_stems.txt";
}

struct DictionaryOptions {
  bool extended_seeds = false;
  std::optional<lexicon::Exclusions> exclusions;
  lexicon::BuildOptions build;
};

inline dictclass::DictionarySet build_dictionaries(const wordnet::Lexicon& lex, const DictionaryOptions& opt = {}) {
  dictclass::DictionarySet out;
  for (Dimension d : kDimensions) {
    auto seeds = lexicon::read_seed_file(lexicon::default_seed_path(d, opt.extended_seeds));
    textprep::WordSet ex = opt.exclusions ? opt.exclusions->for_dimension(d) : textprep::WordSet{};
    out[index_of(d)] = lexicon::build_dictionary(d, seeds, lex, ex, opt.build);
  }
  return out;
}

inline std::vector<LabelSet> label_sets(const Corpus& corpus) {
  std::vector<LabelSet> out;
  for (const auto& r : corpus) {
    if (!r.labels) throw Error("review '" + r.id() + "' has no labels");
    out.push_back(*r.labels);
  }
  return out;
}

inline std::vector<std::string> texts(const Corpus& corpus) {
  std::vector<std::string> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus) out.push_back(r.review.composed_text);
  return out;
}

inline evallab::PredictionSet to_prediction_set(const std::string& method, const Corpus& corpus,
                                                const std::vector<LabelSet>& labels) {
  evallab::PredictionSet s{method, {}};
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (Task t : kTasks) s.add(t, corpus[i].id(), labels[i].get(t));
  return s;
}

// Word-count dictionary method with quotas from the training labels.
inline evallab::PredictionSet dictionary_predictions(const Corpus& train, const Corpus& test,
                                                     const dictclass::DictionarySet& dicts,
                                                     dictclass::DominantStrategy strategy = dictclass::DominantStrategy::optimal,
                                                     const std::string& method = "Dictionary method + word count") {
  auto quota = dictclass::compute_quotas(label_sets(train));
  auto scores = dictclass::score_corpus(test, dicts);
  auto cls = dictclass::classify(scores, quota, strategy);
  return to_prediction_set(method, test, cls.labels);
}

// One TF-IDF logistic regression per task.
inline evallab::PredictionSet tfidf_predictions(const Corpus& train, const Corpus& test, const tfidf::TrainParams& p = {},
                                                tfidf::TextOptions opts = {},
                                                const std::string& method = "TF-IDF + logistic reg.") {
  auto train_labels = label_sets(train);
  auto train_docs = texts(train), test_docs = texts(test);
  evallab::PredictionSet s{method, {}};
  for (Task t : kTasks) {
    std::vector<Label> y;
    for (const auto& l : train_labels) y.push_back(l.get(t));
    auto c = tfidf::train_classifier(t, train_docs, y, p, opts);
    auto pred = tfidf::predict(c, test_docs);
    for (std::size_t i = 0; i < test.size(); ++i) s.add(t, test[i].id(), pred.labels[i]);
  }
  return s;
}

}  // namespace culture::pipeline
