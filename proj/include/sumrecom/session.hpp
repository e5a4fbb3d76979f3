#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumrecom/active.hpp"
#include "sumrecom/config.hpp"
#include "sumrecom/corpus.hpp"
#include "sumrecom/embeddings.hpp"
#include "sumrecom/policy.hpp"
#include "sumrecom/preflearn.hpp"
#include "sumrecom/reward.hpp"
#include "sumrecom/sumgen.hpp"

namespace sumrecom {

struct Event {
  std::int64_t seq = 0;
  std::int64_t timestamp = 0;
  std::string kind;
  nlohmann::json payload;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ClusterInput& input);
ClusterInput cluster_input_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EmbeddingTable& table);
EmbeddingTable embeddings_from_json(const nlohmann::json& j);

/// {sentence_ids, text, length, score, redundancy}
nlohmann::json summary_json(const Summary& summary, const DocumentCluster& cluster);

enum class Stage { kElicitation, kReward, kFinal };
std::string_view to_string(Stage stage);

/// Rank-based concept weights: R(c) / (N - 1), so the top concept weighs 1.
ConceptWeights rank_weights(std::span<const double> utilities);

/// Derives a per-step seed from a base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

/// One interactive run. Every state change goes through apply(), so replaying
/// the event log rebuilds the same state.
class Session {
 public:
  using Clock = std::function<std::int64_t()>;
  using Sink = std::function<void(const Event&)>;

  static Session create(std::string session_id, ClusterInput input,
                        std::optional<EmbeddingTable> embeddings, RunConfig config,
                        Clock clock = {});
  static Session replay(const std::vector<Event>& events);

  void set_sink(Sink sink) { sink_ = std::move(sink); }
  void set_clock(Clock clock) { clock_ = std::move(clock); }

  // Commands. Each validates, then appends one event per transition.
  nlohmann::json next_query();
  nlohmann::json post_feedback(ConceptId left, ConceptId right, int label);
  nlohmann::json summary(std::string_view stage) const;
  nlohmann::json summary_query() const;
  nlohmann::json post_summary_preference(int left, int right, int label);
  nlohmann::json post_summary_score(int index, double score);
  nlohmann::json post_rating(int rating);

  nlohmann::json snapshot() const;
  nlohmann::json log_json() const;

  const std::string& id() const { return id_; }
  const std::vector<Event>& events() const { return events_; }
  const RunConfig& config() const { return config_; }
  const DocumentCluster& cluster() const { return cluster_; }
  const ClusterInput& input() const { return input_; }
  Stage stage() const { return stage_; }
  const QueryState& query_state() const { return query_; }
  const UtilityModel& utility_model() const { return model_; }
  const std::optional<ConceptPair>& outstanding() const { return outstanding_; }
  const SummaryPool& pool() const { return pool_; }
  const RewardModel& reward_model() const { return reward_; }
  const std::optional<Summary>& final_summary() const { return final_; }

  ConceptWeights concept_weights() const;
  Summary draft() const;

  /// The next summary query as pool indices: two for pairwise mode, one for
  /// point mode. Empty once the reward stage is over.
  std::vector<std::size_t> pending_summary_query() const;

 private:
  Session() = default;
  std::vector<std::size_t> random_summary_query() const;

  void append(std::string kind, nlohmann::json payload);
  void apply(const Event& e);
  void apply_created(const nlohmann::json& p);
  void apply_feedback(const nlohmann::json& p);
  void apply_pool_built();
  void apply_reward_feedback(const nlohmann::json& p);
  void apply_summary_emitted();

  void advance_elicitation();
  void maybe_finish_reward();
  std::optional<ConceptPair> compute_query() const;
  bool reward_done() const;
  nlohmann::json concept_json(ConceptId id) const;

  std::string id_;
  RunConfig config_;
  ClusterInput input_;
  std::optional<EmbeddingTable> embeddings_;
  DocumentCluster cluster_;
  FeatureRows rows_;
  ProbabilityTable probs_;
  Partition partition_;
  QueryState query_;
  UtilityModel model_;
  std::optional<ConceptPair> outstanding_;
  bool elicitation_closed_ = false;

  Stage stage_ = Stage::kElicitation;
  SummaryPool pool_;
  FeatureRows pool_features_;
  std::vector<std::size_t> asked_summaries_;
  std::vector<PreferenceRecord> reward_prefs_;
  std::vector<ScoredSample> reward_samples_;
  RewardModel reward_;
  std::optional<Summary> final_;
  std::vector<LearningCurvePoint> policy_curve_;
  std::optional<int> rating_;

  std::vector<Event> events_;
  Clock clock_;
  Sink sink_;
};

}  // namespace sumrecom
