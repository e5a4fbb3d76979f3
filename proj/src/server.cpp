#include "sumrecom/server.hpp"

#include <httplib.h>

#include "sumrecom/error.hpp"
#include "sumrecom/simuser.hpp"

namespace sumrecom {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kPrecondition:
    case ErrorCode::kExhausted: return 409;
    case ErrorCode::kInfeasible: return 422;
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  reply(res, http_status(code), json{{"code", to_string(code)}, {"message", message}});
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("request body is not JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) fail(ErrorCode::kValidation, std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kValidation, std::string("bad field '") + name + "'");
  }
}

// Wraps a handler so library errors become {code, message} replies.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      reply_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      reply_error(res, ErrorCode::kValidation, e.what());
    } catch (const std::exception& e) {
      reply(res, 500, json{{"code", "internal_error"}, {"message", e.what()}});
    }
  };
}

}  // namespace

ApiServer::ApiServer(SessionStore& store) : store_(store), http_(std::make_unique<httplib::Server>()) {
  routes();
}

ApiServer::~ApiServer() = default;

void ApiServer::routes() {
  auto& s = *http_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  s.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    RunConfig config = merge_config(RunConfig{}, body.value("config", json::object()));
    ClusterInput input;
    std::optional<EmbeddingTable> embeddings;
    if (body.contains("cluster")) {
      input = cluster_input_from_json(body["cluster"]);
      if (body.contains("embeddings") && !body["embeddings"].is_null()) {
        embeddings = embeddings_from_json(body["embeddings"]);
      }
    } else if (body.contains("cluster_path")) {
      input = read_cluster_input(field<std::string>(body, "cluster_path"));
    } else if (body.contains("synthetic")) {
      const auto spec = parse_synthetic_spec(body["synthetic"].dump());
      auto raw = generate_synthetic_input(spec, body.value("synthetic_seed", config.seed));
      input = std::move(raw.input);
      embeddings = std::move(raw.embeddings);
    } else {
      fail(ErrorCode::kValidation, "provide cluster, cluster_path or synthetic");
    }
    const auto id = store_.create(std::move(input), std::move(embeddings), config);
    json out = store_.with(id, [](Session& session) {
      return json{{"session_id", session.id()},
                  {"stage", to_string(session.stage())},
                  {"concepts", session.cluster().concepts.size()},
                  {"sentences", session.cluster().sentences.size()},
                  {"config", to_json(session.config())}};
    });
    reply(res, 201, out);
  }));

  s.Get(R"(/sessions/([^/]+)/query)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, store_.with(req.matches[1], [](Session& session) { return session.next_query(); }));
  }));

  s.Post(R"(/sessions/([^/]+)/feedback)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const int left = field<int>(body, "left");
    const int right = field<int>(body, "right");
    const int label = field<int>(body, "label");
    reply(res, 200, store_.with(req.matches[1], [&](Session& session) {
      return session.post_feedback(left, right, label);
    }));
  }));

  s.Get(R"(/sessions/([^/]+)/summary)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string stage = req.has_param("stage") ? req.get_param_value("stage") : "draft";
    reply(res, 200, store_.with(req.matches[1], [&](Session& session) { return session.summary(stage); }));
  }));

  s.Get(R"(/sessions/([^/]+)/summary-query)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, store_.with(req.matches[1], [](Session& session) { return session.summary_query(); }));
  }));

  s.Post(R"(/sessions/([^/]+)/summary-preference)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    reply(res, 200, store_.with(req.matches[1], [&](Session& session) {
      if (body.contains("score")) {
        return session.post_summary_score(field<int>(body, "index"), field<double>(body, "score"));
      }
      return session.post_summary_preference(field<int>(body, "left"), field<int>(body, "right"),
                                             field<int>(body, "label"));
    }));
  }));

  s.Post(R"(/sessions/([^/]+)/rating)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = body_of(req);
    const int rating = field<int>(body, "rating");
    reply(res, 200, store_.with(req.matches[1], [&](Session& session) { return session.post_rating(rating); }));
  }));

  s.Get(R"(/sessions/([^/]+)/log)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, store_.with(req.matches[1], [](Session& session) { return session.log_json(); }));
  }));

  s.Get(R"(/sessions/([^/]+)/state)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, store_.with(req.matches[1], [](Session& session) { return session.snapshot(); }));
  }));

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      reply(res, res.status, json{{"code", res.status == 404 ? "not_found" : "http_error"},
                                  {"message", "no such route"}});
    }
  });
}

bool ApiServer::listen(const std::string& host, int port) { return http_->listen(host, port); }

int ApiServer::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool ApiServer::listen_after_bind() { return http_->listen_after_bind(); }

void ApiServer::stop() { http_->stop(); }

void ApiServer::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace sumrecom
