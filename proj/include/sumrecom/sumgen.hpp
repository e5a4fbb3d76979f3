#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "sumrecom/corpus.hpp"

namespace sumrecom {

struct Summary {
  std::vector<SentenceId> sentence_ids;  // ascending cluster order
  int length = 0;
  std::vector<ConceptId> concept_cover;  // ascending
  double score = 0.0;                    // sum of covered concept weights
  double redundancy = 0.0;
};

struct SummaryPool {
  std::vector<Summary> summaries;  // score descending
  int budget_L = 0;
};

/// Concept weights indexed by concept id; ids past the end weigh 0.
using ConceptWeights = std::vector<double>;

/// Builds the summary record (length, cover, score) for a sentence set.
/// Redundancy is left at 0.
Summary make_summary(const DocumentCluster& cluster, std::vector<SentenceId> sentence_ids,
                     const ConceptWeights& weights);

std::string summary_text(const Summary& summary, const DocumentCluster& cluster);

/// Mean pairwise Jaccard of member sentences' content-token sets, after
/// removing tokens of `preferred` concepts, divided by the sentence count.
double redundancy(const Summary& summary, const DocumentCluster& cluster,
                  const std::set<ConceptId>& preferred);

struct GeneratorOptions {
  // Clusters with at most this many sentences are solved exactly.
  std::size_t exact_limit = 25;
  std::uint64_t seed = 0;
};

/// Sentence subset maximizing covered concept weight subject to a total length
/// strictly below L. Ties go to fewer sentences, then the lexicographically
/// smallest id sequence.
Summary generate_optimal(const DocumentCluster& cluster, const ConceptWeights& weights, int L,
                         const GeneratorOptions& options = {});

struct PoolOptions {
  int pool_size = 20;
  double redundancy_cap = 1.0;
  std::set<ConceptId> preferred;
  GeneratorOptions generator{};
  // Perturbed-greedy restarts per requested pool member (large clusters only).
  int perturbation_rounds = 8;
};

/// Top-scoring distinct nonempty feasible summaries whose redundancy does not
/// exceed the cap, best first.
SummaryPool build_pool(const DocumentCluster& cluster, const ConceptWeights& weights, int L,
                       const PoolOptions& options);

/// Concepts whose weight is within the top `fraction` of the cluster.
std::set<ConceptId> top_concepts(const ConceptWeights& weights, double fraction);

}  // namespace sumrecom
