#pragma once

// Client for the transformer sidecar.
//
//   POST /train    {task, base_model, hyperparams, train, val, seed} -> {model_id, val_accuracy}
//   POST /predict  {model_id, texts} -> {labels, probs}
//   POST /embed    {texts} -> {vectors, dim, pooling}

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "culture/core.hpp"
#include "culture/dictclass.hpp"
#include "culture/lexicon.hpp"

namespace culture::lm {

inline constexpr double kRowTolerance = 1e-6;

struct Hyperparams {
  int epochs = 8;
  double weight_decay = 0.01;
  double learning_rate = 1e-5;
  double dropout = 0.0;
  int batch_size = 16;
  int max_seq_len = 200;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

inline void validate(const Hyperparams& h) {
  if (h.epochs <= 0) throw Error("epochs must be positive");
  if (!(h.weight_decay > 0)) throw Error("weight_decay must be positive");
  if (!(h.learning_rate > 0)) throw Error("learning_rate must be positive");
  if (!(h.dropout >= 0 && h.dropout < 1)) throw Error("dropout must lie in [0,1)");
  if (h.batch_size <= 0) throw Error("batch_size must be positive");
  if (h.max_seq_len <= 0) throw Error("max_seq_len must be positive");
}

inline nlohmann::ordered_json to_json(const Hyperparams& h) {
  return {{"epochs", h.epochs},         {"weight_decay", h.weight_decay}, {"learning_rate", h.learning_rate},
          {"dropout", h.dropout},       {"batch_size", h.batch_size},     {"max_seq_len", h.max_seq_len}};
}

// Missing fields keep their defaults.
inline Hyperparams hyperparams_from_json(const nlohmann::json& j) {
  Hyperparams h;
  if (j.is_null()) return h;
  if (!j.is_object()) throw Error("hyperparams must be an object");
  h.epochs = j.value("epochs", h.epochs);
  h.weight_decay = j.value("weight_decay", h.weight_decay);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.dropout = j.value("dropout", h.dropout);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.max_seq_len = j.value("max_seq_len", h.max_seq_len);
  validate(h);
  return h;
}

// Tri labels travel as -1/0/1, dominant labels as dimension names.
inline nlohmann::ordered_json encode_label(Task t, Label l) {
  if (is_tri(t)) return l;
  return std::string(to_string(static_cast<Dimension>(l)));
}

inline Label decode_label(Task t, const nlohmann::json& j) {
  Label l;
  if (j.is_string()) {
    auto d = parse_dimension(j.get<std::string>());
    if (!d || is_tri(t))
      throw Error("label '" + j.get<std::string>() + "' outside domain of task " + std::string(to_string(t)));
    l = index_of(*d);
  } else if (j.is_number_integer()) {
    l = j.get<int>();
    if (!is_tri(t)) throw Error("label " + std::to_string(l) + " outside domain of task dominant");
  } else {
    throw Error("label must be an integer or a dimension name");
  }
  if (!in_domain(t, l)) throw Error("label " + std::to_string(l) + " outside domain of task " + std::string(to_string(t)));
  return l;
}

struct Example {
  std::string text;
  nlohmann::json label;  // as supplied; checked against the task by validate()

  friend bool operator==(const Example&, const Example&) = default;
};

struct TrainJob {
  Task task = Task::dominant;
  std::string base_model;
  Hyperparams hyperparams;
  std::vector<Example> train, val;
  std::int64_t seed = 0;

  friend bool operator==(const TrainJob&, const TrainJob&) = default;
};

inline Example make_example(Task t, std::string text, Label l) {
  if (!in_domain(t, l)) throw Error("label " + std::to_string(l) + " outside domain of task " + std::string(to_string(t)));
  return {std::move(text), encode_label(t, l)};
}

inline void validate(const TrainJob& job) {
  if (job.train.empty()) throw Error("training set is empty");
  if (job.base_model.empty()) throw Error("base_model is empty");
  validate(job.hyperparams);
  for (const auto* set : {&job.train, &job.val})
    for (const auto& e : *set) decode_label(job.task, e.label);
}

inline nlohmann::ordered_json to_json(const TrainJob& job) {
  auto examples = [&](const std::vector<Example>& v) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& e : v) a.push_back({{"text", e.text}, {"label", e.label}});
    return a;
  };
  nlohmann::ordered_json j;
  j["task"] = std::string(to_string(job.task));
  j["base_model"] = job.base_model;
  j["hyperparams"] = to_json(job.hyperparams);
  j["train"] = examples(job.train);
  j["val"] = examples(job.val);
  j["seed"] = job.seed;
  return j;
}

inline TrainJob train_job_from_json(const nlohmann::json& j) {
  TrainJob job;
  job.task = task_or_throw(j.at("task").get<std::string>());
  job.base_model = j.at("base_model").get<std::string>();
  job.hyperparams = hyperparams_from_json(j.contains("hyperparams") ? j.at("hyperparams") : nlohmann::json());
  for (auto [key, dst] : {std::pair{"train", &job.train}, std::pair{"val", &job.val}}) {
    if (!j.contains(key)) continue;
    for (const auto& e : j.at(key)) dst->push_back({e.at("text").get<std::string>(), e.at("label")});
  }
  job.seed = j.value("seed", std::int64_t{0});
  return job;
}

struct TrainResult {
  std::string model_id;
  double val_accuracy = 0;
};

struct PredictResult {
  std::vector<Label> labels;
  std::vector<std::vector<double>> probs;
};

struct EmbedResult {
  std::vector<std::vector<double>> vectors;
  std::size_t dim = 0;
  std::string pooling;
};

inline void check_probability_rows(const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double s = 0;
    for (double p : rows[i]) {
      if (!std::isfinite(p) || p < 0) throw Error("probability row " + std::to_string(i) + " has an invalid entry");
      s += p;
    }
    if (std::abs(s - 1.0) > kRowTolerance)
      throw Error("probability row " + std::to_string(i) + " sums to " + std::to_string(s));
  }
}

inline double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void check_unit_vectors(const std::vector<std::vector<double>>& vectors, std::size_t dim) {
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim)
      throw Error("embedding " + std::to_string(i) + " has " + std::to_string(vectors[i].size()) +
                  " components, expected " + std::to_string(dim));
    double n = norm(vectors[i]);
    if (!(std::abs(n - 1.0) <= kRowTolerance)) throw Error("embedding " + std::to_string(i) + " has norm " + std::to_string(n));
  }
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("cosine of vectors with different lengths");
  double dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  double na = norm(a), nb = norm(b);
  if (na == 0 || nb == 0) return 0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

// Flag value first, then CULTURE_SIDECAR_URL.
inline std::string sidecar_url(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CULTURE_SIDECAR_URL"); env && *env) return env;
  throw Error("no sidecar address: pass --sidecar-url or set CULTURE_SIDECAR_URL");
}

// Each call opens its own connection, so one client can be shared across threads.
class SidecarClient {
 public:
  explicit SidecarClient(std::string url, int read_timeout_sec = 3600)
      : url_(std::move(url)), read_timeout_(read_timeout_sec) {
    if (url_.empty()) throw Error("empty sidecar url");
    while (!url_.empty() && url_.back() == '/') url_.pop_back();
  }

  const std::string& url() const { return url_; }

  TrainResult train(const TrainJob& job) const {
    validate(job);
    auto j = post("/train", to_json(job));
    TrainResult r;
    r.model_id = j.at("model_id").get<std::string>();
    r.val_accuracy = j.at("val_accuracy").get<double>();
    if (r.model_id.empty()) throw Error("sidecar returned an empty model_id");
    if (!(r.val_accuracy >= 0 && r.val_accuracy <= 1)) throw Error("sidecar returned val_accuracy outside [0,1]");
    return r;
  }

  PredictResult predict(const std::string& model_id, Task task, const std::vector<std::string>& texts) const {
    if (model_id.empty()) throw Error("empty model reference");
    if (texts.empty()) return {};
    auto j = post("/predict", nlohmann::ordered_json{{"model_id", model_id}, {"texts", texts}});
    PredictResult r;
    for (const auto& l : j.at("labels")) r.labels.push_back(decode_label(task, l));
    r.probs = j.at("probs").get<std::vector<std::vector<double>>>();
    if (r.labels.size() != texts.size() || r.probs.size() != texts.size())
      throw Error("sidecar returned " + std::to_string(r.labels.size()) + " labels for " + std::to_string(texts.size()) +
                  " texts");
    check_probability_rows(r.probs);
    return r;
  }

  EmbedResult embed(const std::vector<std::string>& texts) const {
    if (texts.empty()) return {};
    auto j = post("/embed", nlohmann::ordered_json{{"texts", texts}});
    EmbedResult r;
    r.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    r.dim = j.at("dim").get<std::size_t>();
    r.pooling = j.value("pooling", "");
    if (r.vectors.size() != texts.size())
      throw Error("sidecar returned " + std::to_string(r.vectors.size()) + " vectors for " + std::to_string(texts.size()) +
                  " texts");
    check_unit_vectors(r.vectors, r.dim);
    return r;
  }

 private:
  nlohmann::json post(const std::string& path, const nlohmann::ordered_json& body) const {
    httplib::Client cli(url_);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(read_timeout_);
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res) throw Error("sidecar unreachable at " + url_ + " (" + httplib::to_string(res.error()) + ")");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      throw Error("sidecar " + path + " returned HTTP " + std::to_string(res->status) + " with a non-JSON body");
    }
    if (res->status < 200 || res->status >= 300) {
      std::string msg = res->body;
      if (j.is_object() && j.contains("error")) msg = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
      throw Error("sidecar " + path + " failed (HTTP " + std::to_string(res->status) + "): " + msg);
    }
    return j;
  }

  std::string url_;
  int read_timeout_;
};

// Text a dictionary is embedded as: its stems in sorted order, space-separated.
inline std::string dictionary_text(const lexicon::CultureDictionary& dict) {
  std::string out;
  for (const auto& s : dict.stems) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

using Embedder = std::function<EmbedResult(const std::vector<std::string>&)>;

struct TextItem {
  std::string id;
  std::string text;
};

// score(review, d) = cosine(embed(review), embed(dictionary d)).
inline std::vector<dictclass::ScoreVector> semantic_scores(const std::vector<TextItem>& reviews,
                                                           const dictclass::DictionarySet& dicts,
                                                           const Embedder& embed) {
  if (reviews.empty()) return {};
  std::vector<std::string> texts;
  for (const auto& d : dicts) texts.push_back(dictionary_text(d));
  for (const auto& r : reviews) texts.push_back(r.text);
  auto e = embed(texts);
  if (e.vectors.size() != texts.size()) throw Error("embedder returned the wrong number of vectors");
  std::vector<dictclass::ScoreVector> out;
  out.reserve(reviews.size());
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    dictclass::ScoreVector sv;
    sv.review_id = reviews[i].id;
    for (int d = 0; d < 4; ++d) sv.scores[d] = cosine(e.vectors[4 + i], e.vectors[d]);
    out.push_back(std::move(sv));
  }
  return out;
}

inline Embedder client_embedder(const SidecarClient& client) {
  return [&client](const std::vector<std::string>& texts) { return client.embed(texts); };
}

}  // namespace culture::lm
