#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "sumrecom/error.hpp"
#include "sumrecom/pipeline.hpp"
#include "sumrecom/session.hpp"
#include "sumrecom/simuser.hpp"

using namespace sumrecom;
using nlohmann::json;

namespace {

RunConfig small_config(std::uint64_t seed = 0) {
  RunConfig c;
  c.seed = seed;
  c.budget = 5;
  c.reward_budget = 3;
  c.pool_size = 8;
  c.policy_episodes = 500;
  return c;
}

struct Fixture {
  SyntheticInput raw;
  GroundTruthUser user;
  GroundTruthReward expert;

  explicit Fixture(std::uint64_t seed = 0) : raw(generate_synthetic_input(SyntheticSpec{}, seed)) {
    const auto full = featurize_concepts(build_cluster(raw.input, ConceptUnit::kBigram), &raw.embeddings);
    user = planted_user(raw, SyntheticSpec{}, 0.0, seed)(full);
    expert = make_ground_truth_reward(raw.input.references);
  }

  Session create(const RunConfig& c, const std::string& id = "s") const {
    return Session::create(id, raw.input, raw.embeddings, c);
  }
};

// Observable state: the snapshot plus what the read-only endpoints would say.
json observe(const Session& s) {
  json out = s.snapshot();
  out["pending_summary_query"] = s.pending_summary_query();
  out["draft"] = s.query_state().history.empty() ? json(nullptr) : s.summary("draft");
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("rank_weights") {
  const std::vector<double> u = {0.3, -1.0, 2.0, 0.5};
  CHECK(rank_weights(u) == ConceptWeights{1.0 / 3, 0.0, 1.0, 2.0 / 3});
}

TEST_CASE("fresh session serves a round 0 query, idempotently") {
  const Fixture f;
  Session s = f.create(small_config());
  CHECK(s.stage() == Stage::kElicitation);
  CHECK(s.events().size() == 1);
  const json q1 = s.next_query();
  const json q2 = s.next_query();
  CHECK(q1 == q2);
  CHECK(q1["status"] == "pending");
  CHECK(q1["round"] == 0);
  CHECK(q1["budget_remaining"] == 5);
  CHECK(s.events().size() == 2);
  CHECK(q1["left"]["id"].get<int>() < q1["right"]["id"].get<int>());
  CHECK(!q1["left"]["surface"].get<std::string>().empty());
}

TEST_CASE("feedback validation") {
  const Fixture f;
  Session s = f.create(small_config());
  const json q = s.next_query();
  const int l = q["left"]["id"], r = q["right"]["id"];
  const json before = observe(s);
  CHECK(code_of([&] { s.post_feedback(l, r + 1, 1); }) == ErrorCode::kConflict);
  CHECK(code_of([&] { s.post_feedback(l, r, 2); }) == ErrorCode::kValidation);
  CHECK(observe(s) == before);
  CHECK(code_of([&] { (void)s.summary("draft"); }) == ErrorCode::kPrecondition);
  CHECK(code_of([&] { (void)s.summary("final"); }) == ErrorCode::kPrecondition);
  CHECK(code_of([&] { (void)s.summary("sideways"); }) == ErrorCode::kValidation);
  CHECK(code_of([&] { (void)s.summary_query(); }) == ErrorCode::kPrecondition);
  CHECK(code_of([&] { s.post_rating(5); }) == ErrorCode::kPrecondition);
  CHECK(code_of([&] { s.post_rating(11); }) == ErrorCode::kValidation);

  // Swapped order names the same pair.
  const json ok = s.post_feedback(r, l, 0);
  CHECK(ok["accepted"] == true);
  CHECK(ok["round"] == 1);
  CHECK(code_of([&] { s.post_feedback(l, r, 1); }) == ErrorCode::kConflict);
}

TEST_CASE("draft after one feedback equals generate_optimal under the live ranker") {
  const Fixture f;
  Session s = f.create(small_config());
  const json q = s.next_query();
  s.post_feedback(q["left"]["id"], q["right"]["id"], 1);
  const auto w = rank_weights(utilities(s.utility_model(), s.cluster()));
  GeneratorOptions g;
  g.seed = s.config().seed;
  const auto expected = generate_optimal(s.cluster(), w, s.config().length_limit, g);
  const json draft = s.summary("draft");
  CHECK(draft["sentence_ids"] == json(expected.sentence_ids));
  CHECK(draft["score"].get<double>() == expected.score);
  CHECK(draft["length"].get<int>() < s.config().length_limit);
}

TEST_CASE("scripted session runs to the final stage") {
  const Fixture f;
  const RunConfig c = small_config();
  Session s = f.create(c);
  answer_concept_queries(s, f.user);
  CHECK(s.query_state().history.size() == 5);
  CHECK(s.stage() == Stage::kReward);
  const json ex = s.next_query();
  CHECK(ex["status"] == "exhausted");
  CHECK(ex["next"] == "/sessions/s/summary-query");
  CHECK(code_of([&] { s.post_feedback(0, 1, 1); }) == ErrorCode::kPrecondition);

  const json sq = s.summary_query();
  CHECK(sq["mode"] == "pairwise");
  CHECK(sq["left"]["index"] != sq["right"]["index"]);
  answer_summary_queries(s, f.expert);
  CHECK(s.stage() == Stage::kFinal);
  const json fin = s.summary("final");
  CHECK(fin["length"].get<int>() < c.length_limit);
  CHECK(s.next_query()["next"] == "/sessions/s/summary?stage=final");

  CHECK(s.post_rating(7)["accepted"] == true);
  CHECK(code_of([&] { s.post_rating(8); }) == ErrorCode::kConflict);

  // One event per transition.
  std::map<std::string, int> kinds;
  for (const auto& e : s.events()) ++kinds[e.kind];
  CHECK(kinds["created"] == 1);
  CHECK(kinds["query_issued"] == 5);
  CHECK(kinds["feedback"] == 5);
  CHECK(kinds["pool_built"] == 1);
  CHECK(kinds["reward_feedback"] == 3);
  CHECK(kinds["summary_emitted"] == 1);
  CHECK(kinds["rated"] == 1);
  CHECK(s.events().size() == 17);
  for (std::size_t i = 0; i < s.events().size(); ++i) CHECK(s.events()[i].seq == static_cast<std::int64_t>(i));
}

TEST_CASE("replay at every event boundary restores identical state") {
  for (auto mode : {RewardMode::kPairwise, RewardMode::kPoint}) {
    const Fixture f(1);
    RunConfig c = small_config(1);
    c.reward_mode = mode;
    Session s = f.create(c);
    std::vector<json> states = {observe(s)};
    s.set_sink([&](const Event&) { states.push_back(observe(s)); });
    answer_concept_queries(s, f.user);
    answer_summary_queries(s, f.expert);
    s.post_rating(4);
    REQUIRE(states.size() == s.events().size());
    for (std::size_t k = 1; k <= s.events().size(); ++k) {
      CAPTURE(k);
      const std::vector<Event> prefix(s.events().begin(), s.events().begin() + static_cast<long>(k));
      const Session r = Session::replay(prefix);
      CHECK(observe(r) == states[k - 1]);
    }
    const Session r = Session::replay(s.events());
    CHECK(r.log_json() == s.log_json());
    CHECK(r.summary("final") == s.summary("final"));
  }
}

TEST_CASE("replay rejects malformed logs") {
  const Fixture f;
  Session s = f.create(small_config());
  s.next_query();
  auto events = s.events();
  CHECK_THROWS_AS(Session::replay({}), Error);
  CHECK_THROWS_AS(Session::replay({events[1]}), Error);
  std::swap(events[0], events[1]);
  CHECK_THROWS_AS(Session::replay(events), Error);
}

TEST_CASE("one summary preference orders that pair in the reward model") {
  const Fixture f;
  for (int label : {0, 1}) {
    Session s = f.create(small_config());
    answer_concept_queries(s, f.user);
    const auto q = s.pending_summary_query();
    REQUIRE(q.size() == 2);
    s.post_summary_preference(static_cast<int>(q[0]), static_cast<int>(q[1]), label);
    const auto refs = rouge_tokens(s.cluster().references);
    auto value = [&](std::size_t i) {
      return predict(s.reward_model().weights,
                     summary_features(s.pool().summaries[i], s.cluster(), s.config().length_limit, &refs,
                                      rouge_options(s.config()))
                         .values);
    };
    CHECK((value(q[0]) > value(q[1])) == (label == 1));
  }
}

TEST_CASE("expert-guided final summary beats the generator-only baseline") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Fixture f(seed);
    RunConfig c = small_config(seed);
    c.budget = 10;
    c.reward_budget = 10;
    c.policy_episodes = 2000;
    const auto factory = planted_user(f.raw, SyntheticSpec{}, 0.0, seed);
    const auto full = run_simulation(f.raw.input, f.raw.embeddings, c, factory);
    c.variant = Variant::kGeneratorOnly;
    const auto ge = run_simulation(f.raw.input, f.raw.embeddings, c, factory);
    CAPTURE(seed);
    CHECK(full.ground_truth >= ge.ground_truth);
  }
}

TEST_CASE("sessions are isolated") {
  const Fixture f0(0), f1(1);
  Session a = f0.create(small_config(0), "a");
  Session b = f1.create(small_config(1), "b");
  // Interleave single steps on both sessions.
  for (int i = 0; i < 5; ++i) {
    for (auto* pair : {&a, &b}) {
      Session& s = *pair;
      const auto& user = pair == &a ? f0.user : f1.user;
      const json q = s.next_query();
      const int l = q["left"]["id"], r = q["right"]["id"];
      s.post_feedback(l, r, answer_preference(user, l, r, std::uint64_t{0}).label);
    }
  }
  Session solo = f0.create(small_config(0), "a");
  for (int i = 0; i < 5; ++i) {
    const json q = solo.next_query();
    const int l = q["left"]["id"], r = q["right"]["id"];
    solo.post_feedback(l, r, answer_preference(f0.user, l, r, std::uint64_t{0}).label);
  }
  CHECK(observe(a) == observe(solo));
  CHECK(a.id() != b.id());
}

TEST_CASE("create validation") {
  const Fixture f;
  RunConfig c = small_config();
  c.budget = 0;
  CHECK(code_of([&] { f.create(c); }) == ErrorCode::kValidation);
  c = small_config();
  c.length_limit = 0;
  CHECK(code_of([&] { f.create(c); }) == ErrorCode::kValidation);
  ClusterInput tiny = testing::make_input({"Alone."});
  CHECK(code_of([&] { Session::create("x", tiny, std::nullopt, small_config()); }) == ErrorCode::kValidation);
}

TEST_CASE("point-mode reward collection") {
  const Fixture f;
  RunConfig c = small_config();
  c.reward_mode = RewardMode::kPoint;
  Session s = f.create(c);
  answer_concept_queries(s, f.user);
  const json q = s.summary_query();
  CHECK(q["mode"] == "point");
  const int idx = q["summary"]["index"];
  CHECK(code_of([&] { s.post_summary_preference(0, 1, 1); }) == ErrorCode::kPrecondition);
  CHECK(code_of([&] { s.post_summary_score(idx + 1, 0.5); }) == ErrorCode::kConflict);
  s.post_summary_score(idx, 0.5);
  answer_summary_queries(s, f.expert);
  CHECK(s.stage() == Stage::kFinal);
}
