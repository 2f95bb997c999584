#pragma once

// HTTP backend for the annotation UI.
//
//   GET  /api/session                 progress summary
//   GET  /api/next?annotator=ID       next unlabeled review, or {"done": true}
//   POST /api/labels                  one AnnotationRecord as JSON
//   GET  /api/agreement               agreement table over fully labeled reviews
//   GET  /api/adjudication?review_id= records side by side plus the vote result
//
// Writes go through Session, which serializes them and appends to the log.

#include <chrono>
#include <ctime>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "culture/annotate.hpp"

namespace culture::annotate {

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class AnnotationServer {
 public:
  AnnotationServer(Session& session, std::int64_t tiebreak_seed) : session_(session), seed_(tiebreak_seed) {
    routes();
  }

  // Serves files (the browser app) from a directory at "/".
  bool mount_static(const std::string& dir) { return server_.set_mount_point("/", dir); }

  // Binds to the port (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  static void reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }
  static void fail(httplib::Response& res, int status, const std::string& msg) {
    reply(res, status, nlohmann::ordered_json{{"error", msg}});
  }

  template <class F>
  static auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const NotFound& e) {
        fail(res, 404, e.what());
      } catch (const Conflict& e) {
        fail(res, 409, e.what());
      } catch (const nlohmann::json::exception& e) {
        fail(res, 400, std::string("malformed JSON: ") + e.what());
      } catch (const Error& e) {
        fail(res, 400, e.what());
      }
    };
  }

  void routes() {
    server_.Get("/api/session", guarded([this](const httplib::Request&, httplib::Response& res) {
                  auto j = session_.progress();
                  j["annotators"] = session_.annotators();
                  reply(res, 200, j);
                }));

    server_.Get("/api/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  if (!req.has_param("annotator")) throw Error("missing 'annotator' parameter");
                  auto next = session_.next_item(req.get_param_value("annotator"));
                  nlohmann::ordered_json j;
                  j["done"] = !next.has_value();
                  if (next) {
                    j["review"] = {{"id", next->id}, {"text", next->composed_text}, {"word_count", next->word_count}};
                  } else {
                    j["progress"] = session_.progress();
                  }
                  reply(res, 200, j);
                }));

    server_.Post("/api/labels", guarded([this](const httplib::Request& req, httplib::Response& res) {
                   auto rec = record_from_json(nlohmann::json::parse(req.body));
                   if (rec.timestamp.empty()) rec.timestamp = utc_timestamp();
                   session_.submit(rec);
                   reply(res, 201, to_json(rec));
                 }));

    server_.Get("/api/agreement", guarded([this](const httplib::Request&, httplib::Response& res) {
                  auto results = aggregate(session_.complete_records(), seed_);
                  auto j = to_json(agreement_table(results));
                  reply(res, 200, nlohmann::ordered_json{{"reviews", results.size()}, {"table", j}});
                }));

    server_.Get("/api/adjudication", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  if (!req.has_param("review_id")) throw Error("missing 'review_id' parameter");
                  auto id = req.get_param_value("review_id");
                  if (!session_.has_review(id)) throw NotFound("unknown review '" + id + "'");
                  auto recs = session_.records_for(id);
                  nlohmann::ordered_json j;
                  j["review_id"] = id;
                  j["complete"] = recs.size() == kAnnotatorCount;
                  j["records"] = nlohmann::ordered_json::array();
                  for (const auto& r : recs) j["records"].push_back(to_json(r));
                  if (recs.size() == kAnnotatorCount)
                    j["aggregate"] = to_json(aggregate(recs, seed_).front());
                  else
                    j["aggregate"] = nullptr;
                  reply(res, 200, j);
                }));
  }

  Session& session_;
  std::int64_t seed_;
  httplib::Server server_;
};

}  // namespace culture::annotate
