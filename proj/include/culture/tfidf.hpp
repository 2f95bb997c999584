#pragma once

// TF-IDF vectorizer and multinomial logistic regression trained by
// full-batch gradient descent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "culture/core.hpp"
#include "culture/textprep.hpp"

namespace culture::tfidf {

// Lowercase ASCII alphanumeric runs of length >= 2.
inline std::vector<std::string> terms(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) && c < 128)
      cur += static_cast<char>(std::tolower(c));
    else
      flush();
  }
  flush();
  return out;
}

// Text as seen through the dictionary pipeline: content stems only.
inline std::string textprep_view(std::string_view text, const textprep::PreprocessConfig& cfg = {}) {
  std::string out;
  for (const auto& s : textprep::preprocess(text, cfg))
    for (const auto& t : s.tokens) {
      if (!out.empty()) out += ' ';
      out += t;
    }
  return out;
}

struct Vocabulary {
  std::vector<std::string> terms;  // sorted; position = column index
  std::vector<std::size_t> df;
  std::size_t n_docs = 0;

  std::size_t size() const { return terms.size(); }
  // Column of the term or -1.
  long index(std::string_view t) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), t);
    return it != terms.end() && *it == t ? static_cast<long>(it - terms.begin()) : -1;
  }
  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

inline Vocabulary fit_vocabulary(const std::vector<std::string>& documents) {
  if (documents.empty()) throw Error("cannot fit a vocabulary on an empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    auto ts = terms(doc);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (auto& t : ts) ++df[t];
  }
  if (df.empty()) throw Error("corpus yields an empty vocabulary");
  Vocabulary v;
  v.n_docs = documents.size();
  for (auto& [t, n] : df) {
    v.terms.push_back(t);
    v.df.push_back(n);
  }
  return v;
}

struct TfidfModel {
  Vocabulary vocab;
  std::vector<double> idf;
  friend bool operator==(const TfidfModel&, const TfidfModel&) = default;
};

inline TfidfModel fit(const std::vector<std::string>& documents) {
  TfidfModel m;
  m.vocab = fit_vocabulary(documents);
  const double n = static_cast<double>(m.vocab.n_docs);
  for (auto df : m.vocab.df) m.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
  return m;
}

using SparseRow = std::vector<std::pair<std::uint32_t, double>>;  // ascending column

struct SparseMatrix {
  std::vector<SparseRow> rows;
  std::size_t cols = 0;
  std::size_t size() const { return rows.size(); }
};

inline SparseRow transform_one(std::string_view doc, const TfidfModel& m) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : terms(doc)) {
    long j = m.vocab.index(t);
    if (j >= 0) counts[static_cast<std::uint32_t>(j)] += 1.0;
  }
  SparseRow row;
  double norm = 0;
  for (auto& [j, c] : counts) {
    double v = c * m.idf[j];
    row.emplace_back(j, v);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm > 0)
    for (auto& e : row) e.second /= norm;
  return row;
}

inline SparseMatrix transform(const std::vector<std::string>& documents, const TfidfModel& m) {
  SparseMatrix x;
  x.cols = m.vocab.size();
  x.rows.reserve(documents.size());
  for (const auto& d : documents) x.rows.push_back(transform_one(d, m));
  return x;
}

// ---- logistic regression -------------------------------------------------

struct TrainParams {
  double lambda = 0.01;
  double learning_rate = 0.1;
  int epochs = 2000;
  std::int64_t seed = 0;
  double tolerance = 1e-8;
};

struct LogRegModel {
  std::vector<Label> classes;
  std::size_t n_features = 0;
  std::vector<double> weights;  // K x V, row-major
  std::vector<double> bias;     // K
  TrainParams params;
  int epochs_run = 0;
  int lr_halvings = 0;
  double final_loss = 0;

  std::size_t k() const { return classes.size(); }
  double w(std::size_t c, std::size_t j) const { return weights[c * n_features + j]; }
};

struct LossGrad {
  double loss = 0;
  std::vector<double> grad_w;
  std::vector<double> grad_b;
};

inline void logits(const SparseRow& row, const std::vector<double>& w, const std::vector<double>& b, std::size_t v,
                   std::vector<double>& z) {
  const std::size_t k = b.size();
  z.assign(b.begin(), b.end());
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0;
    for (auto [j, x] : row) s += w[c * v + j] * x;
    z[c] += s;
  }
}

// Softmax with max subtraction; returns log-sum-exp.
inline double softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (auto& v : z) sum += (v = std::exp(v - mx));
  for (auto& v : z) v /= sum;
  return mx + std::log(sum);
}

// Mean cross-entropy plus (lambda/2)·||W||^2 and its gradient; y holds class
// indices.
inline LossGrad loss_and_gradient(const SparseMatrix& x, const std::vector<std::size_t>& y,
                                  const std::vector<double>& w, const std::vector<double>& b, double lambda) {
  const std::size_t k = b.size(), v = x.cols, n = x.size();
  LossGrad g;
  g.grad_w.assign(k * v, 0.0);
  g.grad_b.assign(k, 0.0);
  std::vector<double> z;
  for (std::size_t i = 0; i < n; ++i) {
    logits(x.rows[i], w, b, v, z);
    double zy = z[y[i]];
    double lse = softmax_inplace(z);
    g.loss += lse - zy;
    for (std::size_t c = 0; c < k; ++c) {
      double d = z[c] - (c == y[i] ? 1.0 : 0.0);
      g.grad_b[c] += d;
      for (auto [j, xv] : x.rows[i]) g.grad_w[c * v + j] += d * xv;
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  g.loss *= inv;
  for (auto& d : g.grad_b) d *= inv;
  double reg = 0;
  for (std::size_t t = 0; t < k * v; ++t) {
    g.grad_w[t] = g.grad_w[t] * inv + lambda * w[t];
    reg += w[t] * w[t];
  }
  g.loss += 0.5 * lambda * reg;
  return g;
}

inline std::vector<std::size_t> class_indices(const std::vector<Label>& labels, const std::vector<Label>& classes) {
  std::vector<std::size_t> y;
  y.reserve(labels.size());
  for (auto l : labels) {
    auto it = std::find(classes.begin(), classes.end(), l);
    if (it == classes.end()) throw Error("label " + std::to_string(l) + " is not one of the model classes");
    y.push_back(static_cast<std::size_t>(it - classes.begin()));
  }
  return y;
}

// Gradient descent from zero. A step that raises the loss is undone and the
// learning rate halved (counted in lr_halvings).
inline LogRegModel train(const SparseMatrix& x, const std::vector<Label>& labels, const std::vector<Label>& classes,
                         const TrainParams& p = {}) {
  if (x.size() != labels.size()) throw Error("feature rows and labels differ in length");
  if (x.size() == 0) throw Error("no training rows");
  if (p.lambda < 0 || !(p.learning_rate > 0) || p.epochs < 0) throw Error("invalid training parameters");
  for (const auto& row : x.rows)
    for (auto [j, v] : row) {
      if (!std::isfinite(v)) throw Error("non-finite feature value");
      if (j >= x.cols) throw Error("feature index out of range");
    }
  auto y = class_indices(labels, classes);
  {
    std::vector<std::size_t> seen(y);
    std::sort(seen.begin(), seen.end());
    if (std::unique(seen.begin(), seen.end()) - seen.begin() < 2) throw Error("training labels contain a single class");
  }
  LogRegModel m;
  m.classes = classes;
  m.n_features = x.cols;
  m.params = p;
  m.weights.assign(classes.size() * x.cols, 0.0);
  m.bias.assign(classes.size(), 0.0);
  double lr = p.learning_rate;
  auto g = loss_and_gradient(x, y, m.weights, m.bias, p.lambda);
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    auto w_next = m.weights;
    auto b_next = m.bias;
    for (std::size_t t = 0; t < w_next.size(); ++t) w_next[t] -= lr * g.grad_w[t];
    for (std::size_t c = 0; c < b_next.size(); ++c) b_next[c] -= lr * g.grad_b[c];
    auto g_next = loss_and_gradient(x, y, w_next, b_next, p.lambda);
    ++m.epochs_run;
    if (g_next.loss > g.loss) {
      lr /= 2;
      ++m.lr_halvings;
      if (lr < 1e-12) break;
      continue;
    }
    double decrease = g.loss - g_next.loss;
    m.weights = std::move(w_next);
    m.bias = std::move(b_next);
    g = std::move(g_next);
    if (decrease < p.tolerance) break;
  }
  m.final_loss = g.loss;
  return m;
}

struct Prediction {
  std::vector<Label> labels;
  std::vector<std::vector<double>> probabilities;  // rows in class order
};

inline Prediction predict(const LogRegModel& m, const SparseMatrix& x) {
  if (x.cols != m.n_features)
    throw Error("feature count " + std::to_string(x.cols) + " does not match model (" +
                std::to_string(m.n_features) + ")");
  Prediction p;
  std::vector<double> z;
  for (const auto& row : x.rows) {
    for (auto [j, v] : row)
      if (j >= m.n_features) throw Error("feature index out of range");
    logits(row, m.weights, m.bias, m.n_features, z);
    softmax_inplace(z);
    std::size_t best = 0;
    for (std::size_t c = 1; c < z.size(); ++c)
      if (z[c] > z[best]) best = c;
    p.labels.push_back(m.classes[best]);
    p.probabilities.push_back(z);
  }
  return p;
}

// ---- TF-IDF + logistic regression pipeline --------------------------------

struct TextOptions {
  bool use_textprep = false;
};

struct TfidfClassifier {
  Task task = Task::clan;
  TextOptions text;
  TfidfModel tfidf;
  LogRegModel logreg;

  std::string view(std::string_view doc) const { return text.use_textprep ? textprep_view(doc) : std::string(doc); }
};

inline TfidfClassifier train_classifier(Task task, const std::vector<std::string>& docs,
                                        const std::vector<Label>& labels, const TrainParams& p = {},
                                        TextOptions opts = {}) {
  TfidfClassifier c;
  c.task = task;
  c.text = opts;
  std::vector<std::string> viewed;
  viewed.reserve(docs.size());
  for (const auto& d : docs) viewed.push_back(c.view(d));
  c.tfidf = fit(viewed);
  c.logreg = train(transform(viewed, c.tfidf), labels, label_domain(task), p);
  return c;
}

inline Prediction predict(const TfidfClassifier& c, const std::vector<std::string>& docs) {
  std::vector<std::string> viewed;
  viewed.reserve(docs.size());
  for (const auto& d : docs) viewed.push_back(c.view(d));
  return predict(c.logreg, transform(viewed, c.tfidf));
}

inline nlohmann::ordered_json to_json(const TfidfClassifier& c) {
  nlohmann::ordered_json j;
  j["task"] = to_string(c.task);
  j["use_textprep"] = c.text.use_textprep;
  j["n_docs"] = c.tfidf.vocab.n_docs;
  j["vocabulary"] = c.tfidf.vocab.terms;
  j["df"] = c.tfidf.vocab.df;
  j["idf"] = c.tfidf.idf;
  j["classes"] = c.logreg.classes;
  auto& w = j["weights"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < c.logreg.k(); ++k)
    w.push_back(std::vector<double>(c.logreg.weights.begin() + static_cast<long>(k * c.logreg.n_features),
                                    c.logreg.weights.begin() + static_cast<long>((k + 1) * c.logreg.n_features)));
  j["bias"] = c.logreg.bias;
  j["metadata"] = {{"lambda", c.logreg.params.lambda},
                   {"learning_rate", c.logreg.params.learning_rate},
                   {"epochs", c.logreg.params.epochs},
                   {"seed", c.logreg.params.seed},
                   {"tolerance", c.logreg.params.tolerance},
                   {"epochs_run", c.logreg.epochs_run},
                   {"lr_halvings", c.logreg.lr_halvings},
                   {"final_loss", c.logreg.final_loss}};
  return j;
}

inline TfidfClassifier classifier_from_json(const nlohmann::json& j) {
  TfidfClassifier c;
  c.task = task_or_throw(j.at("task").get<std::string>());
  c.text.use_textprep = j.value("use_textprep", false);
  c.tfidf.vocab.n_docs = j.at("n_docs").get<std::size_t>();
  c.tfidf.vocab.terms = j.at("vocabulary").get<std::vector<std::string>>();
  c.tfidf.vocab.df = j.at("df").get<std::vector<std::size_t>>();
  c.tfidf.idf = j.at("idf").get<std::vector<double>>();
  const std::size_t v = c.tfidf.vocab.terms.size();
  if (c.tfidf.vocab.df.size() != v || c.tfidf.idf.size() != v) throw Error("model vocabulary arrays differ in length");
  if (!std::is_sorted(c.tfidf.vocab.terms.begin(), c.tfidf.vocab.terms.end()))
    throw Error("model vocabulary is not sorted");
  auto& m = c.logreg;
  m.classes = j.at("classes").get<std::vector<Label>>();
  if (m.classes != label_domain(c.task)) throw Error("model classes do not match the task's label domain");
  m.n_features = v;
  for (const auto& row : j.at("weights")) {
    auto r = row.get<std::vector<double>>();
    if (r.size() != v) throw Error("weight row length does not match vocabulary");
    m.weights.insert(m.weights.end(), r.begin(), r.end());
  }
  m.bias = j.at("bias").get<std::vector<double>>();
  if (m.weights.size() != m.classes.size() * v || m.bias.size() != m.classes.size())
    throw Error("weight matrix shape does not match classes");
  const auto& md = j.at("metadata");
  m.params.lambda = md.at("lambda").get<double>();
  m.params.learning_rate = md.at("learning_rate").get<double>();
  m.params.epochs = md.at("epochs").get<int>();
  m.params.seed = md.at("seed").get<std::int64_t>();
  m.params.tolerance = md.value("tolerance", 1e-8);
  m.epochs_run = md.value("epochs_run", 0);
  m.lr_halvings = md.value("lr_halvings", 0);
  m.final_loss = md.value("final_loss", 0.0);
  for (double x : m.weights)
    if (!std::isfinite(x)) throw Error("model contains non-finite weights");
  return c;
}

}  // namespace culture::tfidf
