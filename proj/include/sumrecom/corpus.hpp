#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sumrecom/embeddings.hpp"

namespace sumrecom {

using ConceptId = int;
using SentenceId = int;

enum class ConceptUnit { kUnigram, kBigram, kSentence };

std::string_view to_string(ConceptUnit unit);
ConceptUnit parse_concept_unit(std::string_view name);

/// Raw cluster content before segmentation; this is what gets persisted.
struct ClusterInput {
  struct Doc {
    std::string id;
    std::string text;
  };
  std::string id;
  std::vector<Doc> documents;
  std::vector<std::string> references;
};

struct Document {
  std::string id;
  SentenceId first_sentence = 0;
  int sentence_count = 0;
};

struct Sentence {
  std::string doc_id;
  int index_in_doc = 0;
  SentenceId index_in_cluster = 0;
  std::string text;
  std::vector<std::string> tokens;   // lowercased, stopwords kept
  std::vector<std::string> content;  // tokens minus stopwords
  int length = 0;                    // == tokens.size()
  double position_ratio = 0.0;
};

struct FeatureVector {
  std::vector<double> values;
};

struct Concept {
  ConceptId id = 0;
  ConceptUnit unit = ConceptUnit::kUnigram;
  std::string surface;
  std::vector<std::string> tokens;
  std::vector<SentenceId> sentence_ids;  // sorted, unique, nonempty
  FeatureVector features;
};

struct DocumentCluster {
  std::string id;
  ConceptUnit unit = ConceptUnit::kUnigram;
  std::vector<Document> documents;
  std::vector<Sentence> sentences;
  std::vector<Concept> concepts;
  std::vector<std::string> feature_names;
  std::vector<std::string> references;
  // concepts_by_sentence[s] lists concept ids occurring in sentence s, ascending.
  std::vector<std::vector<ConceptId>> concepts_by_sentence;

  std::size_t num_features() const { return feature_names.size(); }
};

/// Segments, tokenizes and extracts concepts at `unit`. Features are left
/// empty; see featurize_concepts.
DocumentCluster build_cluster(const ClusterInput& input, ConceptUnit unit);

ClusterInput read_cluster_input(const std::filesystem::path& path);

/// read_cluster_input + build_cluster + featurize_concepts (no embeddings).
DocumentCluster ingest_cluster(const std::filesystem::path& path, ConceptUnit unit);

std::int64_t count_candidate_pairs(std::int64_t num_concepts);
std::int64_t count_candidate_pairs(const DocumentCluster& cluster);

/// Names of the surface-level feature schema, in column order.
const std::vector<std::string>& concept_feature_names();

enum ConceptFeature : std::size_t {
  kTfIdf = 0,
  kDocFreq,
  kCooccurrence,
  kUppercase,
  kSignature,
  kEmbeddingCentroid,
  kPosition,
  kSentenceLength,
  kUnitLength,
  kNumConceptFeatures,
};

/// Unnormalized feature matrix, one row per concept.
std::vector<std::vector<double>> raw_concept_features(const DocumentCluster& cluster,
                                                      const EmbeddingTable* embeddings);

/// Per-column min-max scaling to [0,1]; constant columns become 0.
void min_max_normalize(std::vector<std::vector<double>>& rows);

DocumentCluster featurize_concepts(DocumentCluster cluster,
                                   const EmbeddingTable* embeddings = nullptr);

/// Keeps only the listed feature columns (in the given order).
DocumentCluster select_features(DocumentCluster cluster, const std::vector<std::size_t>& columns);

/// Signed log-likelihood ratio of a term's cluster frequency against the
/// bundled background unigram table; 0 when the term is not over-represented.
double signature_score(const std::string& term, std::int64_t cluster_count,
                       std::int64_t cluster_total);

}  // namespace sumrecom
