#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sumrecom/corpus.hpp"
#include "sumrecom/embeddings.hpp"
#include "sumrecom/preflearn.hpp"
#include "sumrecom/rouge.hpp"
#include "sumrecom/sumgen.hpp"

namespace sumrecom {

struct GroundTruthUser {
  std::vector<double> true_utilities;  // indexed by concept id, pairwise distinct
  double noise = 0.0;
};

/// Label 1 iff U(a) > U(b), flipped with probability user.noise.
PreferenceRecord answer_preference(const GroundTruthUser& user, ConceptId a, ConceptId b,
                                   std::mt19937_64& rng, int round = 0);
PreferenceRecord answer_preference(const GroundTruthUser& user, ConceptId a, ConceptId b,
                                   std::uint64_t seed, int round = 0);

/// U(c) = weights . phi(c) plus a small jitter that makes every value distinct.
GroundTruthUser make_ground_truth_user(const DocumentCluster& cluster,
                                       const std::vector<double>& planted_weights, double noise,
                                       std::uint64_t seed, double jitter = 1e-6);

struct GroundTruthReward {
  double alpha = 0.8;
  double beta = 0.5;
  double gamma = 0.25;
  std::vector<Tokens> references;
  RougeOptions rouge{};
};

GroundTruthReward make_ground_truth_reward(const std::vector<std::string>& references,
                                           double alpha = 0.8, double beta = 0.5,
                                           double gamma = 0.25, RougeOptions rouge = {});

double ground_truth_value(const GroundTruthReward& gt, double rouge1, double rouge2,
                          double redundancy);

/// alpha*R1 + beta*R2 - gamma*redundancy, redundancy measured with no
/// preferred concepts removed.
double score_summary(const GroundTruthReward& gt, const Summary& summary,
                     const DocumentCluster& cluster);

/// Label 1 iff the left summary has the higher ground-truth value (ties go right).
PreferenceRecord answer_summary_preference(const GroundTruthReward& gt, const Summary& left,
                                           const Summary& right, const DocumentCluster& cluster,
                                           int left_index, int right_index, int round = 0);

struct SyntheticSpec {
  std::string id = "synthetic";
  int documents = 4;
  int sentences_per_document = 6;
  int vocab_size = 40;
  std::vector<double> topic_weights{0.5, 0.3, 0.2};
  int min_words = 4;
  int max_words = 8;
  double stopword_rate = 0.35;
  double entity_rate = 0.4;
  int embedding_dim = 8;
  double embedding_noise = 0.3;
  int references = 2;
  int reference_length = 100;  // reference token count stays below this
  std::map<std::string, double> utility_weights{
      {"tfidf", 0.3},      {"doc_freq", 0.6},     {"cooccurrence", 0.4},
      {"uppercase", 0.2},  {"signature", 1.0},    {"embed_cosine", 0.6},
      {"position", -0.6},  {"sentence_length", 0.0}, {"unit_length", 0.0}};
  double jitter = 1e-6;
  // Log-normal spread applied to word importance for references after the first.
  double reference_noise = 0.3;
  // Words whose importance exceeds this quantile are the planted important
  // words; references cover them.
  double importance_quantile = 0.5;
};

SyntheticSpec parse_synthetic_spec(const std::string& json_text);
std::string synthetic_spec_json(const SyntheticSpec& spec);

struct SyntheticInput {
  ClusterInput input;
  EmbeddingTable embeddings;
  std::vector<int> sentence_topics;  // per generated sentence, cluster order
  // Planted importance of every content word: utility weights applied to the
  // word's unigram features.
  std::map<std::string, double> word_importance;
};

/// Raw documents, word vectors, planted word importance and references
/// (greedy coverage of the most important words). Unit independent.
SyntheticInput generate_synthetic_input(const SyntheticSpec& spec, std::uint64_t seed);

/// Planted utility weights laid out over the concept feature schema.
std::vector<double> planted_weights(const SyntheticSpec& spec,
                                    const std::vector<std::string>& feature_names);

/// U(c) = summed planted importance of c's distinct content words, shifted so
/// the least important word counts 0, plus a distinct jitter. At unigram level
/// this is linear in the planted features.
GroundTruthUser planted_concept_user(const DocumentCluster& cluster,
                                     const std::map<std::string, double>& word_importance,
                                     double noise, std::uint64_t seed, double jitter = 1e-6);

struct SyntheticCluster {
  SyntheticInput raw;
  DocumentCluster cluster;  // featurized with the generated embeddings
  GroundTruthUser user;
  std::vector<std::string> references;
};

SyntheticCluster make_synthetic_cluster(const SyntheticSpec& spec, std::uint64_t seed,
                                        ConceptUnit unit = ConceptUnit::kBigram,
                                        double noise = 0.0);

/// Highest untruncated ROUGE-1 recall reachable by any sentence subset with
/// total length below L.
double oracle_rouge1_bound(const DocumentCluster& cluster, const std::vector<Tokens>& references,
                           int L);

}  // namespace sumrecom
