#include <thread>

#include <httplib.h>

#include "doctest.h"
#include "helpers.hpp"
#include "sumrecom/pipeline.hpp"
#include "sumrecom/server.hpp"

using namespace sumrecom;
using nlohmann::json;

namespace {

class Running {
 public:
  explicit Running(SessionStore& store) : server_(store) {
    port_ = server_.bind_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Running() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }

 private:
  ApiServer server_;
  int port_ = 0;
  std::thread thread_;
};

struct Reply {
  int status = 0;
  json body;
  std::string raw;
};

Reply call(httplib::Client& cli, const std::string& method, const std::string& path,
           const json& body = nullptr) {
  httplib::Result r = method == "GET" ? cli.Get(path)
                                      : cli.Post(path, body.is_null() ? "" : body.dump(), "application/json");
  REQUIRE(r);
  Reply out{r->status, json(), r->body};
  if (!r->body.empty()) out.body = json::parse(r->body);
  return out;
}

RunConfig small_config(std::uint64_t seed) {
  RunConfig c;
  c.seed = seed;
  c.budget = 6;
  c.reward_budget = 4;
  c.pool_size = 10;
  return c;
}

json create_body(std::uint64_t seed, const RunConfig& c) {
  return json{{"synthetic", json::parse(synthetic_spec_json(SyntheticSpec{}))},
              {"synthetic_seed", seed},
              {"config", to_json(c)}};
}

}  // namespace

TEST_CASE("service routes and error codes") {
  SessionStore store;
  Running running(store);
  httplib::Client cli("127.0.0.1", running.port());

  auto bad = call(cli, "POST", "/sessions", json{{"synthetic", json::object()}, {"config", {{"budget", 0}}}});
  CHECK(bad.status == 400);
  CHECK(bad.body["code"] == "validation_error");
  CHECK(!bad.body["message"].get<std::string>().empty());
  CHECK(call(cli, "POST", "/sessions", json::object()).status == 400);
  CHECK(cli.Post("/sessions", "{not json", "application/json")->status == 400);

  const auto created = call(cli, "POST", "/sessions", create_body(0, small_config(0)));
  CHECK(created.status == 201);
  const std::string id = created.body["session_id"];
  const auto again = call(cli, "POST", "/sessions", create_body(0, small_config(0)));
  CHECK(again.body["session_id"] != id);

  CHECK(call(cli, "GET", "/sessions/nope/query").status == 404);
  CHECK(call(cli, "GET", "/sessions/nope/query").body["code"] == "not_found");
  CHECK(call(cli, "GET", "/no/such/route").status == 404);

  const std::string base = "/sessions/" + id;
  const auto q1 = call(cli, "GET", base + "/query");
  const auto q2 = call(cli, "GET", base + "/query");
  CHECK(q1.status == 200);
  CHECK(q1.raw == q2.raw);
  CHECK(q1.body["round"] == 0);
  const int l = q1.body["left"]["id"], r = q1.body["right"]["id"];

  CHECK(call(cli, "GET", base + "/summary?stage=draft").status == 409);
  CHECK(call(cli, "GET", base + "/summary?stage=draft").body["code"] == "precondition_failed");
  CHECK(call(cli, "GET", base + "/summary?stage=nope").status == 400);
  CHECK(call(cli, "POST", base + "/feedback", json{{"left", l}, {"right", r + 1}, {"label", 1}}).status == 409);
  CHECK(call(cli, "POST", base + "/feedback", json{{"left", l}, {"label", 1}}).status == 400);
  CHECK(call(cli, "POST", base + "/rating", json{{"rating", 11}}).status == 400);
  CHECK(call(cli, "POST", base + "/rating", json{{"rating", 3}}).status == 409);
  CHECK(call(cli, "GET", base + "/summary-query").status == 409);

  const auto fb = call(cli, "POST", base + "/feedback", json{{"left", l}, {"right", r}, {"label", 1}});
  CHECK(fb.status == 200);
  CHECK(fb.body["round"] == 1);
  const auto draft = call(cli, "GET", base + "/summary?stage=draft");
  CHECK(draft.status == 200);
  CHECK(draft.body["length"].get<int>() < 100);
  CHECK(call(cli, "GET", base + "/summary").raw == draft.raw);

  const auto log = call(cli, "GET", base + "/log");
  CHECK(log.body["session_id"] == id);
  CHECK(log.body["events"].size() == 4);  // created, query_issued, feedback, query_issued
  CHECK(log.body["events"][2]["kind"] == "feedback");
  CHECK(call(cli, "GET", base + "/state").body["stage"] == "elicitation");

  const auto opt = cli.Options("/sessions");
  REQUIRE(opt);
  CHECK(opt->status == 204);
  CHECK(opt->get_header_value("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("scripted service session matches the offline pipeline byte for byte") {
  for (std::uint64_t seed : {0u, 3u}) {
    const RunConfig c = small_config(seed);
    const SyntheticSpec spec;
    const auto raw = generate_synthetic_input(spec, seed);
    const auto factory = planted_user(raw, spec, c.noise, seed);
    const auto offline = run_simulation(raw.input, raw.embeddings, c, factory);

    SessionStore store;
    Running running(store);
    httplib::Client cli("127.0.0.1", running.port());
    const std::string id = call(cli, "POST", "/sessions", create_body(seed, c)).body["session_id"];
    const std::string base = "/sessions/" + id;

    const auto cluster = featurize_concepts(build_cluster(raw.input, c.unit), &raw.embeddings);
    const auto user = factory(cluster);
    const std::uint64_t answer_seed = mix_seed(seed, 0xa11ce);
    int feedback = 0;
    while (true) {
      const auto q = call(cli, "GET", base + "/query");
      REQUIRE(q.status == 200);
      if (q.body["status"] != "pending") {
        CHECK(q.body["next"] == base + "/summary-query");
        break;
      }
      const int l = q.body["left"]["id"], r = q.body["right"]["id"];
      const int round = q.body["round"];
      const int label = answer_preference(user, l, r, mix_seed(answer_seed, static_cast<std::uint64_t>(round))).label;
      REQUIRE(call(cli, "POST", base + "/feedback", json{{"left", l}, {"right", r}, {"label", label}}).status == 200);
      ++feedback;
    }
    CHECK(feedback == c.budget);

    const auto expert = make_ground_truth_reward(raw.input.references, c.alpha, c.beta, c.gamma, rouge_options(c));
    auto as_summary = [](const json& j) {
      Summary s;
      s.sentence_ids = j["sentence_ids"].get<std::vector<SentenceId>>();
      return s;
    };
    int prefs = 0;
    while (true) {
      const auto sq = call(cli, "GET", base + "/summary-query");
      if (sq.status != 200) break;
      const auto& left = sq.body["left"];
      const auto& right = sq.body["right"];
      const auto rec = answer_summary_preference(expert, as_summary(left["summary"]), as_summary(right["summary"]),
                                                 cluster, left["index"], right["index"]);
      const auto ack = call(cli, "POST", base + "/summary-preference",
                            json{{"left", rec.left_id}, {"right", rec.right_id}, {"label", rec.label}});
      REQUIRE(ack.status == 200);
      ++prefs;
      if (ack.body["stage"] == "final") break;
    }
    CHECK(prefs == c.reward_budget);

    const auto fin = call(cli, "GET", base + "/summary?stage=final");
    REQUIRE(fin.status == 200);
    CHECK(fin.raw == offline.final_json.dump());
    CHECK(call(cli, "POST", base + "/rating", json{{"rating", 10}}).status == 200);
    CHECK(call(cli, "POST", base + "/rating", json{{"rating", 9}}).status == 409);
  }
}

TEST_CASE("service restart from the data directory") {
  const auto dir = testing::temp_dir("server_restart");
  std::string id, state;
  {
    SessionStore store(dir);
    Running running(store);
    httplib::Client cli("127.0.0.1", running.port());
    id = call(cli, "POST", "/sessions", create_body(1, small_config(1))).body["session_id"];
    const auto q = call(cli, "GET", "/sessions/" + id + "/query");
    call(cli, "POST", "/sessions/" + id + "/feedback",
         json{{"left", q.body["left"]["id"]}, {"right", q.body["right"]["id"]}, {"label", 0}});
    state = call(cli, "GET", "/sessions/" + id + "/state").raw;
  }
  SessionStore store(dir);
  Running running(store);
  httplib::Client cli("127.0.0.1", running.port());
  CHECK(call(cli, "GET", "/sessions/" + id + "/state").raw == state);
}
