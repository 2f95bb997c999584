#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <memory>
#include <random>
#include <thread>

#include "culture/lmbridge.hpp"

using namespace culture;
using namespace culture::lm;

namespace {

std::vector<double> stub_vector(const std::string& text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  for (const auto& tok : textprep::tokenize(text)) v[fnv1a(tok) % dim] += 1.0;
  v[fnv1a(text) % dim] += 0.25;
  double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

// Minimal sidecar speaking the bridge protocol.
class StubSidecar {
 public:
  StubSidecar() {
    server_.Post("/train", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      last_train = nlohmann::json::parse(req.body);
      if (fail_training) {
        res.status = 500;
        res.set_content(R"({"error":"CUDA out of memory"})", "application/json");
        return;
      }
      res.set_content(R"({"model_id":"m-1","val_accuracy":0.75})", "application/json");
    });
    server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      auto j = nlohmann::json::parse(req.body);
      if (j.at("model_id") != "m-1") {
        res.status = 404;
        res.set_content(R"({"error":"unknown model_id"})", "application/json");
        return;
      }
      nlohmann::json labels = nlohmann::json::array(), probs = nlohmann::json::array();
      for (const auto& t : j.at("texts")) {
        auto h = fnv1a(t.get<std::string>());
        std::vector<double> p = {double(h % 7 + 1), double(h % 5 + 1), double(h % 3 + 1)};
        double s = p[0] + p[1] + p[2];
        for (double& x : p) x /= s;
        if (bad_rows) p[0] += 0.01;
        probs.push_back(p);
        labels.push_back(int(std::max_element(p.begin(), p.end()) - p.begin()) - 1);
      }
      res.set_content(nlohmann::json{{"labels", labels}, {"probs", probs}}.dump(), "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      auto j = nlohmann::json::parse(req.body);
      nlohmann::json vectors = nlohmann::json::array();
      for (const auto& t : j.at("texts")) {
        auto v = stub_vector(t.get<std::string>(), 16);
        if (unnormalized) v[0] += 0.5;
        vectors.push_back(v);
      }
      res.set_content(nlohmann::json{{"vectors", vectors}, {"dim", 16}, {"pooling", "mean"}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubSidecar() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> calls{0};
  nlohmann::json last_train;
  bool fail_training = false;
  bool bad_rows = false;
  bool unnormalized = false;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TrainJob clan_job() {
  TrainJob job;
  job.task = Task::clan;
  job.base_model = "roberta-base";
  job.train = {make_example(Task::clan, "great team spirit", 1), make_example(Task::clan, "nobody cares", -1)};
  job.val = {make_example(Task::clan, "fine", 0)};
  return job;
}

// Port that nothing listens on.
std::string dead_url() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return "http://127.0.0.1:" + std::to_string(ntohs(addr.sin_port));
}

}  // namespace

TEST(Hyperparams, Defaults) {
  Hyperparams h;
  EXPECT_EQ(h.epochs, 8);
  EXPECT_EQ(h.weight_decay, 0.01);
  EXPECT_EQ(h.learning_rate, 1e-5);
  EXPECT_EQ(h.dropout, 0.0);
  EXPECT_EQ(h.batch_size, 16);
  EXPECT_EQ(h.max_seq_len, 200);
  EXPECT_NO_THROW(validate(h));
  EXPECT_EQ(hyperparams_from_json(nlohmann::json::object()), h);
  EXPECT_EQ(hyperparams_from_json(nullptr), h);
}

TEST(Hyperparams, Validation) {
  Hyperparams h;
  h.dropout = 1.0;
  EXPECT_THROW(validate(h), Error);
  h = {};
  h.epochs = 0;
  EXPECT_THROW(validate(h), Error);
  h = {};
  h.learning_rate = -1;
  EXPECT_THROW(validate(h), Error);
  h = {};
  h.batch_size = 0;
  EXPECT_THROW(validate(h), Error);
  EXPECT_THROW(hyperparams_from_json(nlohmann::json{{"max_seq_len", 0}}), Error);
}

TEST(TrainJobJson, RoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-9, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto job = clan_job();
    job.hyperparams.weight_decay = u(rng);
    job.hyperparams.learning_rate = u(rng) * 1e-4;
    job.hyperparams.dropout = u(rng) * 0.99;
    job.seed = std::int64_t(rng() >> 1);
    auto back = train_job_from_json(nlohmann::json::parse(to_json(job).dump()));
    ASSERT_EQ(back, job);
  }
}

TEST(Labels, EncodingUsesCorpusConventions) {
  EXPECT_EQ(encode_label(Task::clan, -1), -1);
  EXPECT_EQ(encode_label(Task::dominant, 2), "market");
  EXPECT_EQ(decode_label(Task::dominant, "hierarchy"), 3);
  EXPECT_EQ(decode_label(Task::market, 1), 1);
  EXPECT_THROW(decode_label(Task::clan, "market"), Error);
  EXPECT_THROW(decode_label(Task::clan, 2), Error);
  EXPECT_THROW(decode_label(Task::dominant, 1), Error);
  EXPECT_THROW(decode_label(Task::dominant, "bureaucracy"), Error);
  EXPECT_THROW(make_example(Task::dominant, "x", 4), Error);
}

TEST(Train, OmittedHyperparamsSendDefaults) {
  StubSidecar stub;
  SidecarClient client(stub.url());
  auto job = train_job_from_json(nlohmann::json::parse(
      R"({"task":"clan","base_model":"roberta-base","train":[{"text":"a","label":1},{"text":"b","label":0}]})"));
  auto r = client.train(job);
  EXPECT_EQ(r.model_id, "m-1");
  EXPECT_DOUBLE_EQ(r.val_accuracy, 0.75);
  auto hp = stub.last_train.at("hyperparams");
  EXPECT_EQ(hp.at("epochs"), 8);
  EXPECT_EQ(hp.at("weight_decay").get<double>(), 0.01);
  EXPECT_EQ(hp.at("learning_rate").get<double>(), 1e-5);
  EXPECT_EQ(hp.at("dropout").get<double>(), 0.0);
  EXPECT_EQ(hp.at("batch_size"), 16);
  EXPECT_EQ(hp.at("max_seq_len"), 200);
  EXPECT_EQ(stub.last_train.at("task"), "clan");
  EXPECT_EQ(stub.last_train.at("train")[0].at("label"), 1);
}

TEST(Train, ClientSideErrorsNeverReachTheSidecar) {
  StubSidecar stub;
  SidecarClient client(stub.url());
  auto job = clan_job();
  job.train.clear();
  EXPECT_THROW(client.train(job), Error);
  job = clan_job();
  job.train.push_back({"text", "market"});
  try {
    client.train(job);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("outside domain"), std::string::npos);
  }
  EXPECT_EQ(stub.calls.load(), 0);
}

TEST(Train, SidecarFailureIsPropagated) {
  StubSidecar stub;
  stub.fail_training = true;
  SidecarClient client(stub.url());
  try {
    client.train(clan_job());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("CUDA out of memory"), std::string::npos);
  }
}

TEST(Client, UnreachableSidecar) {
  SidecarClient client(dead_url());
  EXPECT_THROW(client.train(clan_job()), Error);
  EXPECT_THROW(client.embed({"x"}), Error);
  EXPECT_THROW(client.predict("m-1", Task::clan, {"x"}), Error);
}

TEST(Predict, ContractProperties) {
  StubSidecar stub;
  SidecarClient client(stub.url());
  EXPECT_TRUE(client.predict("m-1", Task::clan, {}).labels.empty());
  EXPECT_EQ(stub.calls.load(), 0);
  std::vector<std::string> texts = {"one", "two", "three", "four", "five"};
  auto r = client.predict("m-1", Task::clan, texts);
  ASSERT_EQ(r.labels.size(), texts.size());
  ASSERT_EQ(r.probs.size(), texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    double s = 0;
    for (double p : r.probs[i]) s += p;
    EXPECT_NEAR(s, 1.0, 1e-6);
    EXPECT_EQ(client.predict("m-1", Task::clan, {texts[i]}).labels[0], r.labels[i]);
  }
  EXPECT_THROW(client.predict("nope", Task::clan, texts), Error);
  EXPECT_THROW(client.predict("m-1", Task::dominant, texts), Error);
}

TEST(Predict, RejectsRowsThatDoNotSumToOne) {
  StubSidecar stub;
  stub.bad_rows = true;
  SidecarClient client(stub.url());
  EXPECT_THROW(client.predict("m-1", Task::clan, {"a"}), Error);
}

TEST(Predict, SharedClientAcrossThreads) {
  StubSidecar stub;
  SidecarClient client(stub.url());
  auto expected = client.predict("m-1", Task::clan, {"alpha", "beta"}).labels;
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 5; ++i)
        if (client.predict("m-1", Task::clan, {"alpha", "beta"}).labels != expected) ++mismatches;
    });
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST(Embed, ContractProperties) {
  StubSidecar stub;
  SidecarClient client(stub.url());
  EXPECT_TRUE(client.embed({}).vectors.empty());
  auto r = client.embed({"same text", "same text", "other words"});
  EXPECT_EQ(r.dim, 16u);
  EXPECT_EQ(r.pooling, "mean");
  EXPECT_EQ(r.vectors[0], r.vectors[1]);
  for (const auto& v : r.vectors) {
    EXPECT_NEAR(norm(v), 1.0, 1e-6);
    EXPECT_NEAR(cosine(v, v), 1.0, 1e-6);
  }
}

TEST(Embed, RejectsNonUnitVectors) {
  StubSidecar stub;
  stub.unnormalized = true;
  SidecarClient client(stub.url());
  EXPECT_THROW(client.embed({"a"}), Error);
}

TEST(SemanticScores, ThroughSidecar) {
  StubSidecar stub;
  SidecarClient client(stub.url());
  dictclass::DictionarySet dicts;
  const char* words[4][3] = {{"team", "famili", "care"},
                             {"innov", "creativ", "risk"},
                             {"competit", "goal", "custom"},
                             {"rule", "process", "control"}};
  for (int d = 0; d < 4; ++d) {
    dicts[d].dimension = kDimensions[d];
    for (auto* w : words[d]) dicts[d].stems.insert(w);
  }
  EXPECT_EQ(dictionary_text(dicts[2]), "competit custom goal");
  std::vector<TextItem> reviews = {{"r1", dictionary_text(dicts[2])},
                                   {"r2", "we follow every rule and process"},
                                   {"r3", "lunch was ok"}};
  auto scores = semantic_scores(reviews, dicts, client_embedder(client));
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0].review_id, "r1");
  EXPECT_NEAR(scores[0].scores[2], 1.0, 1e-6);
  for (const auto& s : scores)
    for (double x : s.scores) {
      EXPECT_GE(x, -1.0);
      EXPECT_LE(x, 1.0);
    }
  EXPECT_GT(scores[1].scores[3], scores[1].scores[0]);
  EXPECT_TRUE(semantic_scores({}, dicts, client_embedder(client)).empty());
}

TEST(SemanticScores, InvariantToEmbeddingScale) {
  dictclass::DictionarySet dicts;
  for (int d = 0; d < 4; ++d) {
    dicts[d].dimension = kDimensions[d];
    dicts[d].stems.insert("w" + std::to_string(d));
  }
  std::vector<TextItem> reviews;
  for (int i = 0; i < 20; ++i) reviews.push_back({"r" + std::to_string(i), "w" + std::to_string(i % 5) + " x" + std::to_string(i)});
  auto make = [](double scale) -> Embedder {
    return [scale](const std::vector<std::string>& texts) {
      EmbedResult r;
      r.dim = 8;
      for (const auto& t : texts) {
        auto v = stub_vector(t, 8);
        for (double& x : v) x *= scale;
        r.vectors.push_back(v);
      }
      return r;
    };
  };
  auto a = semantic_scores(reviews, dicts, make(1.0));
  auto b = semantic_scores(reviews, dicts, make(37.5));
  auto ra = dictclass::doubled_midranks(a), rb = dictclass::doubled_midranks(b);
  EXPECT_EQ(ra, rb);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int d = 0; d < 4; ++d) EXPECT_NEAR(a[i].scores[d], b[i].scores[d], 1e-12);
}

TEST(SidecarUrl, FlagThenEnvironment) {
  ::unsetenv("CULTURE_SIDECAR_URL");
  EXPECT_THROW(sidecar_url(""), Error);
  ::setenv("CULTURE_SIDECAR_URL", "http://env:9", 1);
  EXPECT_EQ(sidecar_url(""), "http://env:9");
  EXPECT_EQ(sidecar_url("http://flag:1"), "http://flag:1");
  ::unsetenv("CULTURE_SIDECAR_URL");
}
