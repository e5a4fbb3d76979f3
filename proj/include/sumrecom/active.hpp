#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sumrecom/corpus.hpp"
#include "sumrecom/preflearn.hpp"

namespace sumrecom {

// ---------------------------------------------------------------------------
// Concept similarity and co-reference
// ---------------------------------------------------------------------------

/// Character-level edit distance divided by the longer length (0 for two
/// empty strings).
double normalized_levenshtein(std::string_view a, std::string_view b);

/// [1 - normalized Levenshtein, Jaccard of stemmed content words, clamped
/// embedding cosine (0 without a table)].
std::vector<double> similarity_features(const Concept& a, const Concept& b,
                                        const EmbeddingTable* embeddings);

enum class SigmoidForm {
  kLogistic,  // sigmoid(theta . delta + bias)
  kShifted,   // 1 / (1 + exp(scale * (1 - mean(delta))))
};

struct SimilarityModel {
  std::vector<double> theta = {0.0, 0.0, 0.0};
  double bias = 0.0;
  double scale = 1.0;
  SigmoidForm form = SigmoidForm::kLogistic;
};

double coreference_probability(const SimilarityModel& model, std::span<const double> delta);
double coreference_probability(const SimilarityModel& model, const Concept& a, const Concept& b,
                               const EmbeddingTable* embeddings);

struct CorefExample {
  std::string a;
  std::string b;
  int label = 0;
};

/// Logistic regression over similarity_features of surface pairs.
SimilarityModel train_similarity_model(const std::vector<CorefExample>& examples,
                                       int iterations = 4000, double learning_rate = 0.5);

/// Model trained once on the bundled co-reference examples.
const SimilarityModel& default_similarity_model();
const std::vector<CorefExample>& bundled_coref_examples();

// ---------------------------------------------------------------------------
// Pairwise probability table and correlation-clustering partition
// ---------------------------------------------------------------------------

/// Dense symmetric N x N table with a unit diagonal.
class ProbabilityTable {
 public:
  ProbabilityTable() = default;
  explicit ProbabilityTable(std::size_t n) : n_(n), p_(n * n, 0.5) {
    for (std::size_t i = 0; i < n; ++i) p_[i * n + i] = 1.0;
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    p_[i * n_ + j] = v;
    p_[j * n_ + i] = v;
  }
  const std::vector<double>& data() const { return p_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> p_;
};

struct Partition {
  std::vector<int> labels;  // canonical: labels appear in order 0,1,2,... by first concept

  bool coreferent(std::size_t i, std::size_t j) const { return labels[i] == labels[j]; }
  int num_clusters() const;
};

/// Relabels clusters in order of first appearance.
Partition canonical_partition(std::vector<int> labels);

/// Sum over unordered pairs of p*x + (1-p)*(1-x).
double partition_objective(const ProbabilityTable& probs, const Partition& partition);

/// Checks x_ik >= x_ij + x_jk - 1 over all ordered triples.
bool is_transitive(const Partition& partition);

struct PartitionOptions {
  int max_iters = 10000;
  std::uint64_t seed = 0;
  int restarts = 3;
  // When set, receives the objective after every accepted move of the
  // winning restart (first entry is the starting objective).
  std::vector<double>* trace = nullptr;
};

/// Greedy best-improvement local search with relabel, split and merge moves.
Partition partition_concepts(const ProbabilityTable& probs, const PartitionOptions& options = {});

// ---------------------------------------------------------------------------
// Query selection
// ---------------------------------------------------------------------------

using ConceptPair = std::pair<ConceptId, ConceptId>;  // first < second

inline ConceptPair make_pair_key(ConceptId a, ConceptId b) {
  return a < b ? ConceptPair{a, b} : ConceptPair{b, a};
}

struct QueryState {
  int budget = 0;
  std::vector<ConceptPair> asked;  // in issue order
  std::set<ConceptPair> asked_set;
  std::vector<PreferenceRecord> history;
  std::vector<double> gains;  // per history record: 1 - p(answer) before the update

  bool exhausted() const { return static_cast<int>(asked.size()) >= budget; }
  bool was_asked(ConceptId a, ConceptId b) const { return asked_set.count(make_pair_key(a, b)) > 0; }
  void mark_asked(ConceptPair pair);
};

void record_feedback(QueryState& state, const PreferenceRecord& record, double gain);

enum class Strategy {
  kHeuristic,
  kRandom,
  kUncertainty,
  kExpectedModelChange,
  kQueryByCommittee,
  kConformal,
  kBandit,
};

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);
const std::vector<Strategy>& all_strategies();

/// Max over asked pairs (c,d) of the better-aligned mean co-reference
/// probability between (a,b) and (c,d); 0 with no history.
double pair_similarity_to_history(const ProbabilityTable& probs, ConceptPair pair,
                                  const std::vector<ConceptPair>& asked);

struct HeuristicOptions {
  double diversity_weight = 1.0;
};

/// Diversity heuristic: among unasked cross-partition pairs, pick the one whose
/// co-reference probability is nearest the round's target quantile (round i of
/// budget t targets quantile i/t) plus diversity_weight times its similarity
/// to already-asked pairs. The pair is marked asked. nullopt when the budget
/// or the pair space is exhausted.
std::optional<ConceptPair> next_query_heuristic(QueryState& state, const Partition& partition,
                                                const ProbabilityTable& probs,
                                                const HeuristicOptions& options = {});

struct QueryContext {
  const DocumentCluster& cluster;
  const ProbabilityTable& probs;
  const Partition& partition;
  const UtilityModel& model;
  HeuristicOptions heuristic{};
  int committee_size = 5;
  double bandit_epsilon = 0.2;
};

/// Dispatches to the named strategy; the chosen pair is marked asked.
std::optional<ConceptPair> next_query_strategy(Strategy strategy, QueryState& state,
                                               const QueryContext& context, std::uint64_t seed);

}  // namespace sumrecom
