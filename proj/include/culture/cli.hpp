#pragma once

// The `culture` command line. Each stage writes `<output>.manifest.json`
// (or `manifest.json` inside an output directory) recording its arguments,
// input hashes and seeds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "culture/annotate.hpp"
#include "culture/annotate_server.hpp"
#include "culture/corpus.hpp"
#include "culture/dictclass.hpp"
#include "culture/evallab.hpp"
#include "culture/lexicon.hpp"
#include "culture/lmbridge.hpp"
#include "culture/pipeline.hpp"
#include "culture/synth.hpp"
#include "culture/tfidf.hpp"
#include "culture/wordnet.hpp"

namespace culture::cli {

namespace fs = std::filesystem;

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << content;
}

inline std::string file_hash(const fs::path& p) {
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::uint64_t h = fnv1a("");
    for (const auto& f : files) h = fnv1a(fs::relative(f, p).generic_string() + "\n" + read_file(f), h);
    return hex64(h);
  }
  return hex64(fnv1a(read_file(p)));
}

class Manifest {
 public:
  Manifest(std::string stage, std::vector<std::string> args) : stage_(std::move(stage)), args_(std::move(args)) {}

  Manifest& input(const std::string& path) {
    if (!path.empty()) inputs_.push_back({{"path", path}, {"fnv1a", file_hash(path)}});
    return *this;
  }
  Manifest& seed(const std::string& name, std::int64_t v) {
    seeds_[name] = v;
    return *this;
  }
  Manifest& output(const std::string& path) {
    outputs_.push_back(path);
    return *this;
  }
  Manifest& sidecar_dependent(bool v = true) {
    sidecar_ = v;
    return *this;
  }
  Manifest& config_hash(const std::string& h) {
    config_hash_ = h;
    return *this;
  }

  nlohmann::ordered_json json() const {
    nlohmann::ordered_json j;
    j["stage"] = stage_;
    j["args"] = args_;
    j["inputs"] = inputs_;
    j["seeds"] = seeds_;
    j["config_hash"] = config_hash_;
    j["outputs"] = outputs_;
    j["sidecar_dependent"] = sidecar_;
    return j;
  }

  // Beside a file output, or inside an output directory.
  void write_beside(const fs::path& out, bool is_dir = false) const {
    fs::path p = is_dir ? out / "manifest.json" : fs::path(out.string() + ".manifest.json");
    write_file(p, json().dump(2) + "\n");
  }

 private:
  std::string stage_;
  std::vector<std::string> args_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json seeds_ = nlohmann::ordered_json::object();
  std::string config_hash_;
  std::vector<std::string> outputs_;
  bool sidecar_ = false;
};

inline Corpus load_corpus(const std::string& path, std::int64_t compose_seed = 0) { return ingest(path, compose_seed); }

inline std::string corpus_jsonl(const Corpus& c) {
  std::ostringstream os;
  write_jsonl(os, c);
  return os.str();
}

inline dictclass::DictionarySet read_dictionary_dir(const fs::path& dir) {
  dictclass::DictionarySet out;
  for (Dimension d : kDimensions) {
    auto p = dir / (std::string(to_string(d)) + ".json");
    auto dict = lexicon::read_dictionary(p);
    if (dict.dimension != d) throw Error("'" + p.string() + "' holds the " + std::string(to_string(dict.dimension)) + " dictionary");
    out[index_of(d)] = std::move(dict);
  }
  return out;
}

// Union of the four dictionaries, for highlighting dominant-task cases.
inline lexicon::CultureDictionary merged(const dictclass::DictionarySet& dicts) {
  lexicon::CultureDictionary out;
  for (const auto& d : dicts) out.stems.insert(d.stems.begin(), d.stems.end());
  return out;
}

inline const evallab::PredictionSet& pick_set(const std::vector<evallab::PredictionSet>& sets, const std::string& method,
                                              const std::string& file) {
  if (sets.empty()) throw Error("no predictions in '" + file + "'");
  if (method.empty()) return sets.front();
  for (const auto& s : sets)
    if (s.method == method) return s;
  throw Error("method '" + method + "' not found in '" + file + "'");
}

inline std::vector<std::string> ids_and_texts(const Corpus& c, std::vector<std::string>* ids) {
  std::vector<std::string> texts;
  for (const auto& r : c) {
    if (ids) ids->push_back(r.id());
    texts.push_back(r.review.composed_text);
  }
  return texts;
}

class App {
 public:
  App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) args_.emplace_back(argv[i]);
    CLI::App app{"Corporate culture measurement from employee reviews", "culture"};
    app.set_config("--config", "", "Read option values from a TOML or INI file");
    app.add_option("--seed", seed_, "Seed for every seeded step")->capture_default_str();
    app.require_subcommand(1);
    app.fallthrough();
    define(app);
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      if (app.get_subcommands().empty()) err_ << app.help();
      err_ << "culture: error: " << e.what() << "\n";
      return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }
    config_hash_ = hex64(fnv1a(app.config_to_str(true, false)));
    try {
      action_();
    } catch (const std::exception& e) {
      err_ << "culture: error: " << e.what() << "\n";
      return 1;
    }
    return 0;
  }

 private:
  Manifest manifest(const std::string& stage) const {
    Manifest m(stage, args_);
    m.config_hash(config_hash_);
    return m;
  }

  void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
      out_ << content;
    else
      write_file(path, content);
  }

  template <class F>
  void on(CLI::App* sub, F f) {
    sub->callback([this, f] { action_ = f; });
  }

  void define(CLI::App& app) {
    define_corpus(app);
    define_annotate(app);
    define_dict(app);
    define_tfidf(app);
    define_lm(app);
    define_eval(app);
    define_errors(app);
    define_synth(app);
  }

  // --- corpus --------------------------------------------------------------
  void define_corpus(CLI::App& app) {
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate reviews from JSONL or CSV and write normalized JSONL");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("auto");
    ingest_cmd->add_option("--in", *in, "Review file (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--out", *out, "Output JSONL")->required();
    ingest_cmd->add_option("--format", *format, "jsonl, csv or auto")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    on(ingest_cmd, [=, this] {
      auto fmt = *format == "auto" ? format_for_path(*in) : *format == "csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
      auto corpus = culture::ingest(*in, fmt, seed_);
      write_file(*out, corpus_jsonl(corpus));
      manifest("ingest").input(*in).seed("compose", seed_).output(*out).write_beside(*out);
      err_ << corpus.size() << " reviews\n";
    });

    auto* compose_cmd = app.add_subcommand("compose", "Recompose review texts from their sections");
    auto cin = std::make_shared<std::string>();
    auto cout_ = std::make_shared<std::string>();
    compose_cmd->add_option("--in", *cin, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    compose_cmd->add_option("--out", *cout_, "Output JSONL")->required();
    on(compose_cmd, [=, this] {
      auto corpus = load_corpus(*cin, seed_);
      recompose(corpus, seed_);
      write_file(*cout_, corpus_jsonl(corpus));
      manifest("compose").input(*cin).seed("compose", seed_).output(*cout_).write_beside(*cout_);
    });

    auto* split_cmd = app.add_subcommand("split", "Seeded train/validation/test split");
    auto sin = std::make_shared<std::string>();
    auto dir = std::make_shared<std::string>();
    auto sizes = std::make_shared<SplitSizes>();
    split_cmd->add_option("--in", *sin, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--out-dir", *dir, "Directory for train/validation/test JSONL")->required();
    split_cmd->add_option("--train", sizes->train)->capture_default_str();
    split_cmd->add_option("--val", sizes->validation)->capture_default_str();
    split_cmd->add_option("--test", sizes->test)->capture_default_str();
    on(split_cmd, [=, this] {
      auto corpus = load_corpus(*sin);
      auto s = split(corpus, *sizes, seed_);
      fs::path d(*dir);
      write_file(d / "split.json", to_json(s).dump(2) + "\n");
      write_file(d / "train.jsonl", corpus_jsonl(subset(corpus, s.train)));
      write_file(d / "validation.jsonl", corpus_jsonl(subset(corpus, s.validation)));
      write_file(d / "test.jsonl", corpus_jsonl(subset(corpus, s.test)));
      manifest("split")
          .input(*sin)
          .seed("split", seed_)
          .output("split.json")
          .output("train.jsonl")
          .output("validation.jsonl")
          .output("test.jsonl")
          .write_beside(d, true);
    });
  }

  // --- annotate ------------------------------------------------------------
  void define_annotate(CLI::App& app) {
    auto* ann = app.add_subcommand("annotate", "Labeling sessions and vote aggregation");
    ann->require_subcommand(1);

    auto* serve = ann->add_subcommand("serve", "Serve the labeling API (and optionally the UI)");
    auto corpus = std::make_shared<std::string>();
    auto log = std::make_shared<std::string>();
    auto annotators = std::make_shared<std::vector<std::string>>();
    auto host = std::make_shared<std::string>("127.0.0.1");
    auto port = std::make_shared<int>(8080);
    auto static_dir = std::make_shared<std::string>();
    serve->add_option("--corpus", *corpus, "Reviews to label")->required()->check(CLI::ExistingFile);
    serve->add_option("--log", *log, "Append-only record log (JSONL)")->required();
    serve->add_option("--annotators", *annotators, "The three annotator ids")->required()->expected(3)->delimiter(',');
    serve->add_option("--host", *host)->capture_default_str();
    serve->add_option("--port", *port, "0 picks a free port")->capture_default_str();
    serve->add_option("--static", *static_dir, "Directory with the browser app")->check(CLI::ExistingDirectory);
    on(serve, [=, this] {
      std::vector<Review> reviews;
      for (auto& r : load_corpus(*corpus, seed_)) reviews.push_back(r.review);
      annotate::Session session(std::move(reviews), *annotators, *log);
      annotate::AnnotationServer server(session, seed_);
      if (!static_dir->empty() && !server.mount_static(*static_dir)) throw Error("cannot serve '" + *static_dir + "'");
      int bound = server.bind(*host, *port);
      if (bound < 0) throw Error("cannot bind " + *host + ":" + std::to_string(*port));
      out_ << "listening on http://" << *host << ":" << bound << std::endl;
      server.listen_after_bind();
    });

    auto* agg = ann->add_subcommand("aggregate", "Majority vote over three records per review");
    auto records = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto acorpus = std::make_shared<std::string>();
    auto labeled = std::make_shared<std::string>();
    agg->add_option("--records", *records, "Annotation records (JSONL)")->required()->check(CLI::ExistingFile);
    agg->add_option("--out", *out, "Aggregation results (JSONL)")->required();
    agg->add_option("--corpus", *acorpus, "Corpus to attach final labels to")->check(CLI::ExistingFile);
    agg->add_option("--labeled-out", *labeled, "Labeled corpus output (needs --corpus)");
    on(agg, [=, this] {
      auto results = annotate::aggregate(annotate::read_records(*records), seed_);
      std::ostringstream os;
      for (const auto& r : results) os << to_json(r).dump() << '\n';
      write_file(*out, os.str());
      manifest("annotate aggregate").input(*records).seed("tiebreak", seed_).output(*out).write_beside(*out);
      if (!labeled->empty()) {
        if (acorpus->empty()) throw Error("--labeled-out needs --corpus");
        auto c = load_corpus(*acorpus);
        std::map<std::string, LabelSet> final;
        for (const auto& r : results) final[r.review_id] = r.final;
        for (auto& r : c) {
          auto it = final.find(r.id());
          if (it != final.end()) r.labels = it->second;
        }
        write_file(*labeled, corpus_jsonl(c));
        manifest("annotate aggregate")
            .input(*records)
            .input(*acorpus)
            .seed("tiebreak", seed_)
            .output(*labeled)
            .write_beside(*labeled);
      }
    });

    auto* stats = ann->add_subcommand("stats", "Agreement table over aggregated records");
    auto srecords = std::make_shared<std::string>();
    auto sout = std::make_shared<std::string>();
    auto json = std::make_shared<bool>(false);
    stats->add_option("--records", *srecords, "Annotation records (JSONL)")->required()->check(CLI::ExistingFile);
    stats->add_option("--out", *sout, "Output file (default stdout)");
    stats->add_flag("--json", *json, "Emit JSON instead of the text table");
    on(stats, [=, this] {
      auto table = annotate::agreement_table(annotate::aggregate(annotate::read_records(*srecords), seed_));
      emit(*sout, *json ? annotate::to_json(table).dump(2) + "\n" : annotate::render(table));
      if (!sout->empty() && *sout != "-")
        manifest("annotate stats").input(*srecords).seed("tiebreak", seed_).output(*sout).write_beside(*sout);
    });
  }

  // --- dictionaries ----------------------------------------------------------
  void define_dict(CLI::App& app) {
    auto* dict = app.add_subcommand("dict", "Dictionary construction and classification");
    dict->require_subcommand(1);

    auto* build = dict->add_subcommand("build", "Expand seed words through WordNet into stem dictionaries");
    auto dimension = std::make_shared<std::string>("all");
    auto wn = std::make_shared<std::string>();
    auto seeds = std::make_shared<std::string>();
    auto extended = std::make_shared<bool>(false);
    auto exclusions = std::make_shared<std::string>();
    auto problematic = std::make_shared<bool>(false);
    auto depth = std::make_shared<int>(1);
    auto out_dir = std::make_shared<std::string>();
    build->add_option("--dimension", *dimension, "clan, adhocracy, market, hierarchy or all")
        ->check(CLI::IsMember({"all", "clan", "adhocracy", "market", "hierarchy"}));
    build->add_option("--wordnet", *wn, "WordNet dict directory (default: CULTURE_WORDNET_DIR, then the bundled mini lexicon)");
    build->add_option("--seeds", *seeds, "Seed file for a single dimension")->check(CLI::ExistingFile);
    build->add_flag("--extended", *extended, "Use the extended seed lists");
    build->add_option("--exclusions", *exclusions, "Exclusion file")->check(CLI::ExistingFile);
    build->add_flag("--exclude-problematic", *problematic, "Apply the bundled problematic-stem exclusions");
    build->add_option("--depth", *depth, "Hyponym depth")->capture_default_str()->check(CLI::NonNegativeNumber);
    build->add_option("--out-dir", *out_dir, "Directory for <dimension>.json")->required();
    on(build, [=, this] {
      if (!seeds->empty() && *dimension == "all") throw Error("--seeds needs a single --dimension");
      auto wn_dir = pipeline::wordnet_dir(*wn);
      auto lex = wordnet::parse_wordnet(wn_dir);
      std::optional<lexicon::Exclusions> ex;
      std::string ex_path = *exclusions;
      if (ex_path.empty() && *problematic) ex_path = pipeline::default_exclusions_path().string();
      if (!ex_path.empty()) ex = lexicon::read_exclusions(ex_path);
      lexicon::BuildOptions bo;
      bo.hyponym_depth = *depth;
      fs::create_directories(*out_dir);
      auto m = manifest("dict build");
      m.input(wn_dir.string()).input(ex_path);
      for (Dimension d : kDimensions) {
        if (*dimension != "all" && *dimension != to_string(d)) continue;
        auto seed_path = seeds->empty() ? lexicon::default_seed_path(d, *extended).string() : *seeds;
        auto dict = lexicon::build_dictionary(d, lexicon::read_seed_file(seed_path), lex,
                                              ex ? ex->for_dimension(d) : textprep::WordSet{}, bo);
        auto name = std::string(to_string(d)) + ".json";
        lexicon::write_dictionary(fs::path(*out_dir) / name, dict);
        m.input(seed_path).output(name);
        err_ << to_string(d) << ": " << dict.stems.size() << " stems\n";
      }
      m.write_beside(*out_dir, true);
    });

    auto* classify = dict->add_subcommand("classify", "Score reviews and assign labels under training quotas");
    auto dicts = std::make_shared<std::string>();
    auto external = std::make_shared<std::vector<std::string>>();
    auto train = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto scores = std::make_shared<std::string>();
    auto strategy = std::make_shared<std::string>("optimal");
    auto similarity = std::make_shared<std::string>("wordcount");
    auto method = std::make_shared<std::string>();
    auto sidecar = std::make_shared<std::string>();
    classify->add_option("--dicts", *dicts, "Directory with <dimension>.json")->check(CLI::ExistingDirectory);
    classify->add_option("--external", *external, "DIMENSION=PATH word list or dictionary, replaces that dimension");
    classify->add_option("--train", *train, "Labeled training corpus (quotas)")->required()->check(CLI::ExistingFile);
    classify->add_option("--in", *in, "Reviews to classify")->required()->check(CLI::ExistingFile);
    classify->add_option("--out", *out, "Predictions JSONL")->required();
    classify->add_option("--scores", *scores, "Also write the score CSV here");
    classify->add_option("--strategy", *strategy, "Dominant assignment: optimal or greedy")
        ->check(CLI::IsMember({"optimal", "greedy"}));
    classify->add_option("--similarity", *similarity, "wordcount, or embedding through the sidecar")
        ->check(CLI::IsMember({"wordcount", "embedding"}));
    classify->add_option("--method", *method, "Method name in the predictions");
    classify->add_option("--sidecar-url", *sidecar, "Sidecar address (default CULTURE_SIDECAR_URL)");
    on(classify, [=, this] {
      dictclass::DictionarySet set;
      std::array<bool, 4> have{};
      auto m = manifest("dict classify");
      if (!dicts->empty()) {
        set = read_dictionary_dir(*dicts);
        have.fill(true);
        m.input(*dicts);
      }
      for (const auto& spec : *external) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) throw Error("--external expects DIMENSION=PATH, got '" + spec + "'");
        Dimension d = dimension_or_throw(spec.substr(0, eq));
        auto path = spec.substr(eq + 1);
        set[index_of(d)] = lexicon::load_external_dictionary(path, d);
        have[index_of(d)] = true;
        m.input(path);
      }
      for (Dimension d : kDimensions)
        if (!have[index_of(d)]) throw Error("no dictionary for " + std::string(to_string(d)) + " (use --dicts or --external)");
      auto train_c = load_corpus(*train), test_c = load_corpus(*in);
      std::vector<dictclass::ScoreVector> sv;
      bool embedding = *similarity == "embedding";
      if (embedding) {
        lm::SidecarClient client(lm::sidecar_url(*sidecar));
        std::vector<lm::TextItem> items;
        for (const auto& r : test_c) items.push_back({r.id(), r.review.composed_text});
        sv = lm::semantic_scores(items, set, lm::client_embedder(client));
      } else {
        sv = dictclass::score_corpus(test_c, set);
      }
      auto quota = dictclass::compute_quotas(pipeline::label_sets(train_c));
      auto cls = dictclass::classify(sv, quota, dictclass::parse_strategy(*strategy));
      for (int d = 0; d < 4; ++d)
        if (cls.clipped[d]) err_ << "warning: " << to_string(kDimensions[d]) << " negative quota clipped\n";
      std::string name = !method->empty() ? *method
                         : embedding       ? "Dictionary method + BERT similarity"
                                           : "Dictionary method + word count";
      std::ostringstream os;
      evallab::write_predictions(os, pipeline::to_prediction_set(name, test_c, cls.labels));
      write_file(*out, os.str());
      if (!scores->empty()) {
        std::ostringstream ss;
        dictclass::write_scores_csv(ss, sv);
        write_file(*scores, ss.str());
      }
      m.input(*train).input(*in).output(*out).sidecar_dependent(embedding);
      if (!scores->empty()) m.output(*scores);
      m.write_beside(*out);
    });
  }

  // --- tf-idf ------------------------------------------------------------------
  void define_tfidf(CLI::App& app) {
    auto* tf = app.add_subcommand("tfidf", "TF-IDF with multinomial logistic regression");
    tf->require_subcommand(1);

    auto* train = tf->add_subcommand("train", "Fit one model for one task");
    auto task = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto p = std::make_shared<tfidf::TrainParams>();
    auto textprep_route = std::make_shared<bool>(false);
    train->add_option("--task", *task, "clan, adhocracy, market, hierarchy or dominant")
        ->required()
        ->check(CLI::IsMember({"clan", "adhocracy", "market", "hierarchy", "dominant"}));
    train->add_option("--train", *in, "Labeled training corpus")->required()->check(CLI::ExistingFile);
    train->add_option("--out", *out, "Model JSON")->required();
    train->add_option("--lambda", p->lambda, "L2 penalty")->capture_default_str();
    train->add_option("--lr", p->learning_rate, "Initial learning rate")->capture_default_str();
    train->add_option("--epochs", p->epochs, "Maximum full-batch epochs")->capture_default_str();
    train->add_option("--tolerance", p->tolerance, "Stop when the loss decrease falls below this")->capture_default_str();
    train->add_flag("--textprep", *textprep_route, "Tokenize, drop stopwords and stem before vectorizing");
    on(train, [=, this] {
      Task t = task_or_throw(*task);
      auto c = load_corpus(*in);
      auto docs = ids_and_texts(c, nullptr);
      std::vector<Label> y;
      for (const auto& l : pipeline::label_sets(c)) y.push_back(l.get(t));
      auto params = *p;
      params.seed = seed_;
      auto model = tfidf::train_classifier(t, docs, y, params, {*textprep_route});
      write_file(*out, tfidf::to_json(model).dump() + "\n");
      manifest("tfidf train").input(*in).seed("train", seed_).output(*out).write_beside(*out);
      err_ << "epochs " << model.logreg.epochs_run << ", loss " << model.logreg.final_loss << "\n";
    });

    auto* predict = tf->add_subcommand("predict", "Predict labels with a fitted model");
    auto model = std::make_shared<std::string>();
    auto pin = std::make_shared<std::string>();
    auto pout = std::make_shared<std::string>();
    auto method = std::make_shared<std::string>("TF-IDF + logistic reg.");
    auto append = std::make_shared<bool>(false);
    predict->add_option("--model", *model, "Model JSON")->required()->check(CLI::ExistingFile);
    predict->add_option("--in", *pin, "Reviews")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", *pout, "Predictions JSONL")->required();
    predict->add_option("--method", *method, "Method name in the predictions")->capture_default_str();
    predict->add_flag("--append", *append, "Append to an existing predictions file");
    on(predict, [=, this] {
      auto c = tfidf::classifier_from_json(nlohmann::json::parse(read_file(*model)));
      auto corpus = load_corpus(*pin);
      std::vector<std::string> ids;
      auto docs = ids_and_texts(corpus, &ids);
      auto pred = tfidf::predict(c, docs);
      evallab::PredictionSet s{*method, {}};
      for (std::size_t i = 0; i < ids.size(); ++i) s.add(c.task, ids[i], pred.labels[i]);
      std::ostringstream os;
      evallab::write_predictions(os, s);
      std::string prior = *append && fs::exists(*pout) ? read_file(*pout) : "";
      write_file(*pout, prior + os.str());
      auto m = manifest("tfidf predict");
      m.input(*model).input(*pin).output(*pout);
      m.write_beside(*pout);
    });
  }

  // --- language model sidecar ----------------------------------------------------
  void define_lm(CLI::App& app) {
    auto* lmc = app.add_subcommand("lm", "Fine-tuned transformer through the sidecar");
    lmc->require_subcommand(1);

    auto* train = lmc->add_subcommand("train", "Fine-tune; with several --base-model values keeps the best on validation");
    auto task = std::make_shared<std::string>();
    auto tr = std::make_shared<std::string>();
    auto val = std::make_shared<std::string>();
    auto bases = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"roberta-large"});
    auto hp = std::make_shared<lm::Hyperparams>();
    auto url = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    train->add_option("--task", *task)->required()->check(CLI::IsMember({"clan", "adhocracy", "market", "hierarchy", "dominant"}));
    train->add_option("--train", *tr, "Labeled training corpus")->required()->check(CLI::ExistingFile);
    train->add_option("--val", *val, "Labeled validation corpus")->check(CLI::ExistingFile);
    train->add_option("--base-model", *bases, "Base model id; repeat to compare candidates")->capture_default_str();
    train->add_option("--epochs", hp->epochs)->capture_default_str();
    train->add_option("--weight-decay", hp->weight_decay)->capture_default_str();
    train->add_option("--learning-rate", hp->learning_rate)->capture_default_str();
    train->add_option("--dropout", hp->dropout)->capture_default_str();
    train->add_option("--batch-size", hp->batch_size)->capture_default_str();
    train->add_option("--max-seq-len", hp->max_seq_len)->capture_default_str();
    train->add_option("--sidecar-url", *url, "Sidecar address (default CULTURE_SIDECAR_URL)");
    train->add_option("--out", *out, "Model reference JSON")->required();
    on(train, [=, this] {
      Task t = task_or_throw(*task);
      lm::TrainJob job;
      job.task = t;
      job.hyperparams = *hp;
      job.seed = seed_;
      auto add = [&](const std::string& path, std::vector<lm::Example>& dst) {
        auto c = load_corpus(path);
        auto labels = pipeline::label_sets(c);
        for (std::size_t i = 0; i < c.size(); ++i)
          dst.push_back(lm::make_example(t, c[i].review.composed_text, labels[i].get(t)));
      };
      add(*tr, job.train);
      if (!val->empty()) add(*val, job.val);
      lm::validate(job.hyperparams);
      if (job.train.empty()) throw Error("training set is empty");
      lm::SidecarClient client(lm::sidecar_url(*url));
      nlohmann::ordered_json best;
      nlohmann::ordered_json candidates = nlohmann::ordered_json::array();
      for (const auto& base : *bases) {
        job.base_model = base;
        auto r = client.train(job);
        nlohmann::ordered_json c{{"base_model", base}, {"model_id", r.model_id}, {"val_accuracy", r.val_accuracy}};
        candidates.push_back(c);
        if (best.is_null() || r.val_accuracy > best["val_accuracy"].get<double>()) best = c;
        err_ << base << ": val_accuracy " << r.val_accuracy << "\n";
      }
      nlohmann::ordered_json ref;
      ref["task"] = std::string(to_string(t));
      ref["model_id"] = best["model_id"];
      ref["base_model"] = best["base_model"];
      ref["val_accuracy"] = best["val_accuracy"];
      ref["hyperparams"] = lm::to_json(*hp);
      ref["candidates"] = candidates;
      write_file(*out, ref.dump(2) + "\n");
      auto m = manifest("lm train");
      m.input(*tr).input(*val).seed("train", seed_).output(*out).sidecar_dependent();
      m.write_beside(*out);
    });

    auto* predict = lmc->add_subcommand("predict", "Predict with a fine-tuned model");
    auto ref = std::make_shared<std::string>();
    auto pin = std::make_shared<std::string>();
    auto pout = std::make_shared<std::string>();
    auto method = std::make_shared<std::string>();
    auto purl = std::make_shared<std::string>();
    predict->add_option("--model-ref", *ref, "Reference written by lm train")->required()->check(CLI::ExistingFile);
    predict->add_option("--in", *pin, "Reviews")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", *pout, "Predictions JSONL")->required();
    predict->add_option("--method", *method, "Method name (default: RoBERTa <base model>)");
    predict->add_option("--sidecar-url", *purl, "Sidecar address (default CULTURE_SIDECAR_URL)");
    on(predict, [=, this] {
      auto r = nlohmann::json::parse(read_file(*ref));
      Task t = task_or_throw(r.at("task").get<std::string>());
      auto corpus = load_corpus(*pin);
      std::vector<std::string> ids;
      auto texts = ids_and_texts(corpus, &ids);
      lm::SidecarClient client(lm::sidecar_url(*purl));
      auto pred = client.predict(r.at("model_id").get<std::string>(), t, texts);
      evallab::PredictionSet s{method->empty() ? "RoBERTa " + r.value("base_model", std::string("model")) : *method, {}};
      for (std::size_t i = 0; i < ids.size(); ++i) s.add(t, ids[i], pred.labels[i]);
      std::ostringstream os;
      evallab::write_predictions(os, s);
      write_file(*pout, os.str());
      auto m = manifest("lm predict");
      m.input(*ref).input(*pin).output(*pout).sidecar_dependent();
      m.write_beside(*pout);
    });

    auto* embed = lmc->add_subcommand("embed", "Embed review texts");
    auto ein = std::make_shared<std::string>();
    auto eout = std::make_shared<std::string>();
    auto eurl = std::make_shared<std::string>();
    embed->add_option("--in", *ein, "Reviews")->required()->check(CLI::ExistingFile);
    embed->add_option("--out", *eout, "Vectors JSONL")->required();
    embed->add_option("--sidecar-url", *eurl, "Sidecar address (default CULTURE_SIDECAR_URL)");
    on(embed, [=, this] {
      auto corpus = load_corpus(*ein);
      std::vector<std::string> ids;
      auto texts = ids_and_texts(corpus, &ids);
      lm::SidecarClient client(lm::sidecar_url(*eurl));
      auto e = client.embed(texts);
      std::ostringstream os;
      for (std::size_t i = 0; i < ids.size(); ++i)
        os << nlohmann::ordered_json{{"review_id", ids[i]}, {"pooling", e.pooling}, {"vector", e.vectors[i]}}.dump() << '\n';
      write_file(*eout, os.str());
      auto m = manifest("lm embed");
      m.input(*ein).output(*eout).sidecar_dependent();
      m.write_beside(*eout);
    });
  }

  // --- evaluation ---------------------------------------------------------------
  void define_eval(CLI::App& app) {
    auto* ev = app.add_subcommand("eval", "Accuracy reports");
    ev->require_subcommand(1);
    auto* report = ev->add_subcommand("report", "Accuracy table: random, majority class, then each method");
    auto preds = std::make_shared<std::vector<std::string>>();
    auto gold = std::make_shared<std::string>();
    auto train = std::make_shared<std::string>();
    auto sampled = std::make_shared<bool>(false);
    auto out = std::make_shared<std::string>();
    auto out_csv = std::make_shared<std::string>();
    report->add_option("--predictions", *preds, "Prediction JSONL files")->required()->check(CLI::ExistingFile);
    report->add_option("--gold", *gold, "Labeled evaluation corpus")->required()->check(CLI::ExistingFile);
    report->add_option("--train", *train, "Labeled training corpus for the majority row")->check(CLI::ExistingFile);
    report->add_flag("--sampled-random", *sampled, "Seeded random predictions instead of 1/K");
    report->add_option("--out", *out, "Text table (default stdout)");
    report->add_option("--out-csv", *out_csv, "CSV table");
    on(report, [=, this] {
      std::vector<evallab::PredictionSet> sets;
      std::map<std::string, std::size_t> seen;
      for (const auto& p : *preds)
        for (auto& s : evallab::read_predictions(p)) {
          auto [it, fresh] = seen.emplace(s.method, sets.size());
          if (fresh) {
            sets.push_back(std::move(s));
            continue;
          }
          for (auto& [t, labels] : s.tasks)
            for (auto& [id, l] : labels) sets[it->second].add(t, id, l);
        }
      evallab::Baselines base;
      if (!train->empty()) base.training = evallab::gold_from_corpus(load_corpus(*train));
      if (*sampled) base.random_seed = seed_;
      auto rep = evallab::build_report(sets, evallab::gold_from_corpus(load_corpus(*gold)), base);
      emit(*out, evallab::render_text(rep));
      if (!out_csv->empty()) write_file(*out_csv, evallab::render_csv(rep));
      auto m = manifest("eval report");
      for (const auto& p : *preds) m.input(p);
      m.input(*gold).input(*train);
      if (*sampled) m.seed("random", seed_);
      if (!out->empty() && *out != "-") m.output(*out);
      if (!out_csv->empty()) m.output(*out_csv);
      if (!out->empty() && *out != "-")
        m.write_beside(*out);
      else if (!out_csv->empty())
        m.write_beside(*out_csv);
    });
  }

  // --- error analysis -------------------------------------------------------------
  void define_errors(CLI::App& app) {
    auto* er = app.add_subcommand("errors", "Error analysis: case selection, highlighting, reason table");
    er->require_subcommand(1);

    auto* select = er->add_subcommand("select", "Reviews method A gets right and method B gets wrong");
    auto a = std::make_shared<std::string>();
    auto b = std::make_shared<std::string>();
    auto ma = std::make_shared<std::string>();
    auto mb = std::make_shared<std::string>();
    auto gold = std::make_shared<std::string>();
    auto task = std::make_shared<std::string>();
    auto max_words = std::make_shared<std::size_t>(50);
    auto dicts = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    select->add_option("--a", *a, "Predictions of method A")->required()->check(CLI::ExistingFile);
    select->add_option("--b", *b, "Predictions of method B")->required()->check(CLI::ExistingFile);
    select->add_option("--method-a", *ma, "Method name inside --a (default: first)");
    select->add_option("--method-b", *mb, "Method name inside --b (default: first)");
    select->add_option("--gold", *gold, "Labeled evaluation corpus")->required()->check(CLI::ExistingFile);
    select->add_option("--task", *task)->required()->check(CLI::IsMember({"clan", "adhocracy", "market", "hierarchy", "dominant"}));
    select->add_option("--max-words", *max_words, "Keep reviews with fewer words")->capture_default_str();
    select->add_option("--dicts", *dicts, "Dictionary directory for hit spans")->check(CLI::ExistingDirectory);
    select->add_option("--out", *out, "Error case CSV")->required();
    on(select, [=, this] {
      Task t = task_or_throw(*task);
      auto sa = evallab::read_predictions(*a);
      auto sb = evallab::read_predictions(*b);
      auto corpus = load_corpus(*gold);
      auto cases = evallab::select_error_cases(pick_set(sa, *ma, *a), pick_set(sb, *mb, *b),
                                               evallab::gold_from_corpus(corpus), corpus, t, *max_words);
      if (!dicts->empty()) {
        auto set = read_dictionary_dir(*dicts);
        evallab::attach_hits(cases, is_tri(t) ? set[index_of(dimension_of(t))] : merged(set));
      }
      std::ostringstream os;
      evallab::write_error_cases(os, cases);
      write_file(*out, os.str());
      auto m = manifest("errors select");
      m.input(*a).input(*b).input(*gold).input(*dicts).output(*out);
      m.write_beside(*out);
      err_ << cases.size() << " cases\n";
    });

    auto* highlight = er->add_subcommand("highlight", "Mark dictionary words with **...**");
    auto dict = std::make_shared<std::string>();
    auto text = std::make_shared<std::string>();
    auto hin = std::make_shared<std::string>();
    auto hout = std::make_shared<std::string>();
    highlight->add_option("--dict", *dict, "Dictionary JSON")->required()->check(CLI::ExistingFile);
    auto* text_opt = highlight->add_option("--text", *text, "Text to highlight");
    highlight->add_option("--in", *hin, "Text file to highlight")->check(CLI::ExistingFile)->excludes(text_opt);
    highlight->add_option("--out", *hout, "Output (default stdout)");
    on(highlight, [=, this] {
      auto d = lexicon::read_dictionary(*dict);
      std::string src = hin->empty() ? *text : read_file(*hin);
      std::string result = evallab::highlight_hits(src, d);
      if (hin->empty()) result += "\n";
      emit(*hout, result);
    });

    auto* table = er->add_subcommand("table", "Reason shares per dimension from tagged cases");
    auto tin = std::make_shared<std::string>();
    auto tout = std::make_shared<std::string>();
    auto json = std::make_shared<bool>(false);
    auto name_a = std::make_shared<std::string>("A");
    auto name_b = std::make_shared<std::string>("B");
    table->add_option("--in", *tin, "Tagged error case CSV")->required()->check(CLI::ExistingFile);
    table->add_option("--out", *tout, "Output (default stdout)");
    table->add_flag("--json", *json, "Emit JSON");
    table->add_option("--name-a", *name_a, "Column title for method A")->capture_default_str();
    table->add_option("--name-b", *name_b, "Column title for method B")->capture_default_str();
    on(table, [=, this] {
      std::ifstream in(*tin, std::ios::binary);
      auto t = evallab::reason_table(evallab::read_error_cases(in));
      emit(*tout, *json ? evallab::to_json(t).dump(2) + "\n" : evallab::render_text(t, *name_a, *name_b));
      if (!tout->empty() && *tout != "-") manifest("errors table").input(*tin).output(*tout).write_beside(*tout);
    });
  }

  // --- synthetic corpus ----------------------------------------------------------
  void define_synth(CLI::App& app) {
    auto* sy = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    auto opt = std::make_shared<synth::Options>();
    auto out = std::make_shared<std::string>();
    auto ann = std::make_shared<std::string>();
    sy->add_option("--n", opt->n, "Number of reviews")->capture_default_str()->check(CLI::PositiveNumber);
    sy->add_option("--out", *out, "Corpus JSONL (default stdout)");
    sy->add_option("--annotations", *ann, "Also write three annotator records per review here");
    sy->add_option("--annotator-accuracy", opt->annotator_accuracy)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    on(sy, [=, this] {
      auto o = *opt;
      o.seed = seed_;
      o.annotations = !ann->empty();
      auto res = synth::synthesize(o);
      emit(*out, corpus_jsonl(res.corpus));
      auto m = manifest("synth");
      m.seed("synth", seed_);
      if (!ann->empty()) {
        std::ostringstream os;
        for (const auto& r : res.records) os << annotate::to_json(r).dump() << '\n';
        write_file(*ann, os.str());
        m.output(*ann);
      }
      if (!out->empty() && *out != "-") {
        m.output(*out);
        m.write_beside(*out);
      }
    });
  }

  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> args_;
  std::int64_t seed_ = 0;
  std::string config_hash_;
  std::function<void()> action_;
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return App(out, err).run(argc, argv);
}

}  // namespace culture::cli
