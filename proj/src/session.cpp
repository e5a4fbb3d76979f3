#include "sumrecom/session.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sumrecom/error.hpp"
#include "sumrecom/kernels.hpp"

namespace sumrecom {

using nlohmann::json;

json to_json(const Event& e) {
  return json{{"seq", e.seq}, {"timestamp", e.timestamp}, {"kind", e.kind}, {"payload", e.payload}};
}

Event event_from_json(const json& j) {
  try {
    return Event{j.at("seq").get<std::int64_t>(), j.at("timestamp").get<std::int64_t>(),
                 j.at("kind").get<std::string>(), j.value("payload", json::object())};
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed event: ") + e.what());
  }
}

json to_json(const ClusterInput& input) {
  json docs = json::array();
  for (const auto& d : input.documents) docs.push_back({{"id", d.id}, {"text", d.text}});
  return json{{"id", input.id}, {"documents", docs}, {"references", input.references}};
}

ClusterInput cluster_input_from_json(const json& j) {
  ClusterInput in;
  try {
    in.id = j.value("id", std::string("cluster"));
    for (const auto& d : j.at("documents")) {
      in.documents.push_back({d.value("id", "d" + std::to_string(in.documents.size())),
                              d.at("text").get<std::string>()});
    }
    in.references = j.value("references", std::vector<std::string>{});
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed cluster: ") + e.what());
  }
  if (in.documents.empty()) fail(ErrorCode::kValidation, "cluster has no documents");
  return in;
}

json to_json(const EmbeddingTable& table) {
  json vectors = json::object();
  for (const auto& [w, v] : table.rows()) vectors[w] = v;
  return json{{"dim", table.dim()}, {"vectors", vectors}};
}

EmbeddingTable embeddings_from_json(const json& j) {
  try {
    EmbeddingTable table(j.at("dim").get<std::size_t>());
    for (auto& [w, v] : j.at("vectors").items()) table.add(w, v.get<std::vector<double>>());
    return table;
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed embeddings: ") + e.what());
  }
}

json summary_json(const Summary& s, const DocumentCluster& cluster) {
  return json{{"sentence_ids", s.sentence_ids},
              {"text", summary_text(s, cluster)},
              {"length", s.length},
              {"score", s.score},
              {"redundancy", s.redundancy}};
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kElicitation: return "elicitation";
    case Stage::kReward: return "reward";
    case Stage::kFinal: return "final";
  }
  return "elicitation";
}

ConceptWeights rank_weights(std::span<const double> utilities) {
  const auto ranks = rank_values(utilities);
  const double denom = utilities.size() > 1 ? static_cast<double>(utilities.size() - 1) : 1.0;
  ConceptWeights w(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) w[i] = ranks[i] / denom;
  return w;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base ^ (salt * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------

Session Session::create(std::string session_id, ClusterInput input,
                        std::optional<EmbeddingTable> embeddings, RunConfig config, Clock clock) {
  config.validate();
  Session s;
  s.clock_ = std::move(clock);
  json payload{{"session_id", session_id},
               {"cluster", to_json(input)},
               {"config", to_json(config)},
               {"embeddings", embeddings ? to_json(*embeddings) : json(nullptr)}};
  s.append("created", std::move(payload));
  return s;
}

Session Session::replay(const std::vector<Event>& events) {
  if (events.empty() || events.front().kind != "created") {
    fail(ErrorCode::kValidation, "a session log must start with a created event");
  }
  Session s;
  for (const auto& e : events) {
    if (e.seq != static_cast<std::int64_t>(s.events_.size())) {
      fail(ErrorCode::kValidation, "session log is out of order at seq " + std::to_string(e.seq));
    }
    s.apply(e);
    s.events_.push_back(e);
  }
  return s;
}

void Session::append(std::string kind, json payload) {
  Event e;
  e.seq = static_cast<std::int64_t>(events_.size());
  e.timestamp = clock_ ? clock_() : e.seq;
  e.kind = std::move(kind);
  e.payload = std::move(payload);
  apply(e);
  events_.push_back(e);
  if (sink_) sink_(events_.back());
}

void Session::apply(const Event& e) {
  if (e.kind == "created") {
    apply_created(e.payload);
  } else if (e.kind == "query_issued") {
    const ConceptPair pair{e.payload.at("left").get<int>(), e.payload.at("right").get<int>()};
    query_.mark_asked(make_pair_key(pair.first, pair.second));
    outstanding_ = pair;
  } else if (e.kind == "feedback") {
    apply_feedback(e.payload);
  } else if (e.kind == "pool_built") {
    apply_pool_built();
  } else if (e.kind == "reward_feedback") {
    apply_reward_feedback(e.payload);
  } else if (e.kind == "summary_emitted") {
    apply_summary_emitted();
  } else if (e.kind == "rated") {
    rating_ = e.payload.at("rating").get<int>();
  } else {
    fail(ErrorCode::kValidation, "unknown event kind '" + e.kind + "'");
  }
}

void Session::apply_created(const json& p) {
  id_ = p.at("session_id").get<std::string>();
  config_ = merge_config(RunConfig{}, p.at("config"));
  config_.validate();
  input_ = cluster_input_from_json(p.at("cluster"));
  if (!p.at("embeddings").is_null()) embeddings_ = embeddings_from_json(p.at("embeddings"));
  const EmbeddingTable* emb = embeddings_ ? &*embeddings_ : nullptr;

  cluster_ = featurize_concepts(build_cluster(input_, config_.unit), emb);
  if (!config_.features.empty()) {
    std::vector<std::size_t> cols;
    for (const auto& f : config_.features) {
      const auto& names = cluster_.feature_names;
      cols.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), f) - names.begin()));
    }
    cluster_ = select_features(std::move(cluster_), cols);
  }
  if (cluster_.concepts.size() < 2) {
    fail(ErrorCode::kValidation, "cluster needs at least two concepts to ask about");
  }
  rows_ = concept_rows(cluster_);
  probs_ = kernels::coreference_table(cluster_, default_similarity_model(), emb);
  PartitionOptions popts;
  popts.seed = config_.seed;
  partition_ = partition_concepts(probs_, popts);

  query_ = QueryState{};
  query_.budget = config_.budget;
  model_ = UtilityModel::zeros(cluster_.num_features());
  model_.learning_rate = config_.concept_learning_rate;
  model_.epochs = config_.epochs;
  model_.seed = config_.seed;
  reward_ = RewardModel{{}, config_.reward_mode, config_.summary_learning_rate,
                        config_.reward_iterations, config_.reward_l2};
  stage_ = Stage::kElicitation;
}

void Session::apply_feedback(const json& p) {
  PreferenceRecord r{p.at("left").get<int>(), p.at("right").get<int>(), p.at("label").get<int>(),
                     static_cast<int>(query_.history.size())};
  validate(r);
  const double h = logistic(dot(model_.weights, rows_.at(r.left_id)) -
                            dot(model_.weights, rows_.at(r.right_id)));
  const double gain = 1.0 - (r.label == 1 ? h : 1.0 - h);
  record_feedback(query_, r, gain);
  if (config_.refit == RefitMode::kFull) {
    UtilityModel fresh = UtilityModel::zeros(cluster_.num_features());
    fresh.learning_rate = config_.concept_learning_rate;
    fresh.epochs = config_.epochs;
    fresh.seed = config_.seed;
    model_ = fit(fresh, query_.history, rows_);
  } else {
    incremental_update(model_, query_.history, rows_);
  }
  outstanding_.reset();
}

ConceptWeights Session::concept_weights() const {
  if (config_.variant == Variant::kNoPreference) {
    return ConceptWeights(cluster_.concepts.size(), 1.0);
  }
  return rank_weights(utilities(model_, cluster_));
}

namespace {

GeneratorOptions generator_options(const RunConfig& c) {
  GeneratorOptions g;
  g.seed = c.seed;
  return g;
}

}  // namespace

Summary Session::draft() const {
  const auto w = concept_weights();
  Summary s = generate_optimal(cluster_, w, config_.length_limit, generator_options(config_));
  if (!s.sentence_ids.empty()) {
    s.redundancy = redundancy(s, cluster_, top_concepts(w, config_.preferred_fraction));
  }
  return s;
}

void Session::apply_pool_built() {
  elicitation_closed_ = true;
  outstanding_.reset();
  const auto w = concept_weights();
  PoolOptions opts;
  opts.pool_size = config_.pool_size;
  opts.redundancy_cap = config_.redundancy_cap;
  opts.preferred = top_concepts(w, config_.preferred_fraction);
  opts.generator = generator_options(config_);
  pool_ = build_pool(cluster_, w, config_.length_limit, opts);
  const auto refs = rouge_tokens(cluster_.references);
  pool_features_.clear();
  for (const auto& s : pool_.summaries) {
    pool_features_.push_back(summary_features(s, cluster_, config_.length_limit,
                                              refs.empty() ? nullptr : &refs,
                                              rouge_options(config_))
                                 .values);
  }
  stage_ = Stage::kReward;
}

bool Session::reward_done() const {
  if (stage_ != Stage::kReward) return true;
  if (config_.variant == Variant::kGeneratorOnly) return true;
  const std::size_t answered = config_.reward_mode == RewardMode::kPairwise
                                   ? reward_prefs_.size()
                                   : reward_samples_.size();
  if (static_cast<int>(answered) >= config_.reward_budget) return true;
  std::size_t needed = 1;
  if (config_.reward_mode == RewardMode::kPairwise && asked_summaries_.empty()) needed = 2;
  return pool_.summaries.size() < asked_summaries_.size() + needed;
}

std::vector<std::size_t> Session::random_summary_query() const {
  std::vector<std::size_t> fresh;
  for (std::size_t i = 0; i < pool_features_.size(); ++i) {
    if (std::find(asked_summaries_.begin(), asked_summaries_.end(), i) == asked_summaries_.end()) {
      fresh.push_back(i);
    }
  }
  std::mt19937_64 rng(mix_seed(config_.seed, 0x5a11 + asked_summaries_.size()));
  std::shuffle(fresh.begin(), fresh.end(), rng);
  if (config_.reward_mode == RewardMode::kPoint) return {fresh.front()};
  if (asked_summaries_.empty()) return {fresh[0], fresh[1]};
  std::uniform_int_distribution<std::size_t> pick(0, asked_summaries_.size() - 1);
  return {asked_summaries_[pick(rng)], fresh.front()};
}

std::vector<std::size_t> Session::pending_summary_query() const {
  if (reward_done()) return {};
  if (config_.variant == Variant::kNoActive) return random_summary_query();
  if (config_.reward_mode == RewardMode::kPoint) {
    return select_query_summaries(pool_features_, asked_summaries_, 1);
  }
  if (asked_summaries_.empty()) return select_query_summaries(pool_features_, {}, 2);
  const std::size_t fresh = select_query_summaries(pool_features_, asked_summaries_, 1).front();
  auto sorted = asked_summaries_;
  std::sort(sorted.begin(), sorted.end());
  std::size_t anchor = sorted.front();
  if (!reward_.weights.empty()) {
    double best = predict(reward_.weights, pool_features_[anchor]);
    for (std::size_t i : sorted) {
      const double v = predict(reward_.weights, pool_features_[i]);
      if (v > best) {
        best = v;
        anchor = i;
      }
    }
  }
  return {anchor, fresh};
}

void Session::apply_reward_feedback(const json& p) {
  RewardModel fresh{{}, config_.reward_mode, config_.summary_learning_rate,
                    config_.reward_iterations, config_.reward_l2};
  auto note_asked = [&](std::size_t i) {
    if (std::find(asked_summaries_.begin(), asked_summaries_.end(), i) == asked_summaries_.end()) {
      asked_summaries_.push_back(i);
    }
  };
  if (p.contains("score")) {
    const auto i = p.at("index").get<std::size_t>();
    note_asked(i);
    reward_samples_.push_back({pool_features_.at(i), p.at("score").get<double>()});
    reward_ = fit_point(fresh, reward_samples_);
    return;
  }
  PreferenceRecord r{p.at("left").get<int>(), p.at("right").get<int>(), p.at("label").get<int>(),
                     static_cast<int>(reward_prefs_.size())};
  note_asked(static_cast<std::size_t>(std::min(r.left_id, r.right_id)));
  note_asked(static_cast<std::size_t>(std::max(r.left_id, r.right_id)));
  reward_prefs_.push_back(r);
  reward_ = fit_pairwise(fresh, reward_prefs_, pool_features_);
}

void Session::apply_summary_emitted() {
  const auto w = concept_weights();
  if (config_.variant == Variant::kGeneratorOnly) {
    final_ = draft();
    stage_ = Stage::kFinal;
    return;
  }
  std::vector<double> values;
  for (const auto& f : pool_features_) {
    values.push_back(reward_.weights.empty() ? 0.0 : predict(reward_.weights, f));
  }
  const auto refs = rouge_tokens(cluster_.references);
  const auto* refs_ptr = refs.empty() ? nullptr : &refs;
  PolicyInputs in;
  in.cluster = &cluster_;
  in.pool = &pool_;
  in.pool_features = &pool_features_;
  in.concept_weights = w;
  in.L = config_.length_limit;
  in.featurize = [&](const Summary& s) {
    return summary_features(s, cluster_, config_.length_limit, refs_ptr, rouge_options(config_)).values;
  };
  in.reward = [&](const Summary& s) {
    for (std::size_t i = 0; i < pool_.summaries.size(); ++i) {
      if (pool_.summaries[i].sentence_ids == s.sentence_ids) return values[i];
    }
    return reward_.weights.empty() ? 0.0 : predict(reward_.weights, in.featurize(s));
  };
  PolicyOptions opts;
  opts.mode = config_.policy_mode;
  opts.episodes = config_.policy_episodes;
  opts.learning_rate = config_.policy_learning_rate;
  opts.initial_temperature = config_.initial_temperature;
  opts.final_temperature = config_.final_temperature;
  opts.seed = mix_seed(config_.seed, 0x5eed);
  auto trained = train_policy(in, opts);
  policy_curve_ = trained.curve;
  Summary best = best_summary(trained.model, in);
  if (config_.policy_mode == PolicyMode::kSequential && !best.sentence_ids.empty()) {
    best.redundancy = redundancy(best, cluster_, top_concepts(w, config_.preferred_fraction));
  }
  final_ = best;
  stage_ = Stage::kFinal;
}

std::optional<ConceptPair> Session::compute_query() const {
  if (query_.exhausted()) return std::nullopt;
  QueryState scratch = query_;
  QueryContext ctx{cluster_, probs_, partition_, model_};
  ctx.heuristic.diversity_weight = config_.diversity_weight;
  const auto strategy = effective_config(config_).strategy;
  return next_query_strategy(strategy, scratch, ctx,
                             mix_seed(config_.seed, query_.asked.size() + 1));
}

void Session::advance_elicitation() {
  if (stage_ != Stage::kElicitation || outstanding_) return;
  if (auto pair = compute_query()) {
    append("query_issued", json{{"left", pair->first},
                                {"right", pair->second},
                                {"round", query_.asked.size()}});
    return;
  }
  append("pool_built", json::object());
  maybe_finish_reward();
}

void Session::maybe_finish_reward() {
  if (stage_ == Stage::kReward && reward_done()) {
    append("summary_emitted", json::object());
  }
}

json Session::concept_json(ConceptId id) const {
  const auto& c = cluster_.concepts.at(static_cast<std::size_t>(id));
  return json{{"id", id},
              {"surface", c.surface},
              {"context", cluster_.sentences[c.sentence_ids.front()].text}};
}

json Session::next_query() {
  if (stage_ == Stage::kElicitation) advance_elicitation();
  if (stage_ == Stage::kElicitation && outstanding_) {
    return json{{"status", "pending"},
                {"round", query_.asked.size() - 1},
                {"budget", query_.budget},
                {"budget_remaining", query_.budget - static_cast<int>(query_.history.size())},
                {"left", concept_json(outstanding_->first)},
                {"right", concept_json(outstanding_->second)}};
  }
  const std::string next = stage_ == Stage::kReward ? "/sessions/" + id_ + "/summary-query"
                                                    : "/sessions/" + id_ + "/summary?stage=final";
  return json{{"status", "exhausted"},
              {"stage", to_string(stage_)},
              {"asked", query_.history.size()},
              {"next", next}};
}

json Session::post_feedback(ConceptId left, ConceptId right, int label) {
  if (stage_ != Stage::kElicitation) {
    fail(ErrorCode::kPrecondition, "session is past the elicitation stage");
  }
  if (label != 0 && label != 1) fail(ErrorCode::kValidation, "label must be 0 or 1");
  if (!outstanding_ || make_pair_key(left, right) != *outstanding_) {
    fail(ErrorCode::kConflict, "feedback does not match the outstanding query");
  }
  append("feedback", json{{"left", left}, {"right", right}, {"label", label}});
  advance_elicitation();
  return json{{"accepted", true},
              {"round", query_.history.size()},
              {"stage", to_string(stage_)}};
}

json Session::summary(std::string_view stage) const {
  if (stage == "draft") {
    if (query_.history.empty()) {
      fail(ErrorCode::kPrecondition, "a draft needs at least one answered query");
    }
    return summary_json(draft(), cluster_);
  }
  if (stage == "final") {
    if (!final_) fail(ErrorCode::kPrecondition, "the final summary is not ready");
    return summary_json(*final_, cluster_);
  }
  fail(ErrorCode::kValidation, "stage must be draft or final");
}

json Session::summary_query() const {
  if (stage_ != Stage::kReward) {
    fail(ErrorCode::kPrecondition, "summary queries are only served in the reward stage");
  }
  const auto q = pending_summary_query();
  auto item = [&](std::size_t i) {
    return json{{"index", i}, {"summary", summary_json(pool_.summaries[i], cluster_)}};
  };
  if (q.size() == 2) {
    return json{{"status", "pending"}, {"mode", "pairwise"}, {"round", reward_prefs_.size()},
                {"left", item(q[0])}, {"right", item(q[1])}};
  }
  return json{{"status", "pending"}, {"mode", "point"}, {"round", reward_samples_.size()},
              {"summary", item(q.front())}};
}

json Session::post_summary_preference(int left, int right, int label) {
  if (stage_ != Stage::kReward || config_.reward_mode != RewardMode::kPairwise) {
    fail(ErrorCode::kPrecondition, "summary preferences are not being collected");
  }
  if (label != 0 && label != 1) fail(ErrorCode::kValidation, "label must be 0 or 1");
  const auto q = pending_summary_query();
  const bool same = q.size() == 2 && ((static_cast<int>(q[0]) == left && static_cast<int>(q[1]) == right) ||
                                      (static_cast<int>(q[0]) == right && static_cast<int>(q[1]) == left));
  if (!same) fail(ErrorCode::kConflict, "summary pair does not match the outstanding query");
  append("reward_feedback", json{{"left", left}, {"right", right}, {"label", label}});
  maybe_finish_reward();
  return json{{"accepted", true}, {"stage", to_string(stage_)}};
}

json Session::post_summary_score(int index, double score) {
  if (stage_ != Stage::kReward || config_.reward_mode != RewardMode::kPoint) {
    fail(ErrorCode::kPrecondition, "summary scores are not being collected");
  }
  const auto q = pending_summary_query();
  if (q.size() != 1 || static_cast<int>(q[0]) != index) {
    fail(ErrorCode::kConflict, "summary does not match the outstanding query");
  }
  if (!std::isfinite(score)) fail(ErrorCode::kValidation, "score must be finite");
  append("reward_feedback", json{{"index", index}, {"score", score}});
  maybe_finish_reward();
  return json{{"accepted", true}, {"stage", to_string(stage_)}};
}

json Session::post_rating(int rating) {
  if (rating < 0 || rating > 10) fail(ErrorCode::kValidation, "rating must lie in 0..10");
  if (stage_ != Stage::kFinal) fail(ErrorCode::kPrecondition, "no final summary to rate yet");
  if (rating_) fail(ErrorCode::kConflict, "session already rated");
  append("rated", json{{"rating", rating}});
  return json{{"accepted", true}};
}

json Session::snapshot() const {
  json history = json::array();
  for (const auto& r : query_.history) {
    history.push_back({r.left_id, r.right_id, r.label, r.round});
  }
  json asked = json::array();
  for (const auto& p : query_.asked) asked.push_back({p.first, p.second});
  json pool = json::array();
  for (const auto& s : pool_.summaries) pool.push_back(s.sentence_ids);
  json prefs = json::array();
  for (const auto& r : reward_prefs_) prefs.push_back({r.left_id, r.right_id, r.label});
  json samples = json::array();
  for (const auto& s : reward_samples_) samples.push_back(s.score);
  return json{{"session_id", id_},
              {"stage", to_string(stage_)},
              {"events", events_.size()},
              {"asked", asked},
              {"history", history},
              {"gains", query_.gains},
              {"outstanding", outstanding_ ? json{outstanding_->first, outstanding_->second}
                                           : json(nullptr)},
              {"utility_weights", model_.weights},
              {"pool", pool},
              {"asked_summaries", asked_summaries_},
              {"reward_prefs", prefs},
              {"reward_samples", samples},
              {"reward_weights", reward_.weights},
              {"final", final_ ? summary_json(*final_, cluster_) : json(nullptr)},
              {"rating", rating_ ? json(*rating_) : json(nullptr)}};
}

json Session::log_json() const {
  json events = json::array();
  for (const auto& e : events_) events.push_back(to_json(e));
  return json{{"session_id", id_},
              {"cluster_id", input_.id},
              {"config", to_json(config_)},
              {"events", events}};
}

}  // namespace sumrecom
