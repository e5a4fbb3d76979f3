#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sumrecom/corpus.hpp"

namespace sumrecom::testing {

inline ClusterInput make_input(const std::vector<std::string>& docs,
                               const std::vector<std::string>& refs = {}) {
  ClusterInput in;
  in.id = "t";
  for (std::size_t i = 0; i < docs.size(); ++i) in.documents.push_back({"d" + std::to_string(i), docs[i]});
  in.references = refs;
  return in;
}

inline DocumentCluster make_cluster(const std::vector<std::string>& docs,
                                    ConceptUnit unit = ConceptUnit::kUnigram,
                                    const std::vector<std::string>& refs = {}) {
  return featurize_concepts(build_cluster(make_input(docs, refs), unit));
}

/// Cluster whose sentences are given explicitly as concept-id lists, with a
/// fixed per-sentence length. Concepts carry one feature column.
inline DocumentCluster synthetic_concept_cluster(const std::vector<std::vector<int>>& covers,
                                                 const std::vector<int>& lengths, int num_concepts) {
  DocumentCluster c;
  c.id = "synthetic";
  c.feature_names = {"f"};
  c.documents.push_back({"d0", 0, static_cast<int>(covers.size())});
  c.concepts_by_sentence.resize(covers.size());
  for (int k = 0; k < num_concepts; ++k) {
    Concept con;
    con.id = k;
    con.surface = "c" + std::to_string(k);
    con.tokens = {con.surface};
    con.features.values = {0.0};
    c.concepts.push_back(con);
  }
  for (std::size_t s = 0; s < covers.size(); ++s) {
    Sentence sen;
    sen.doc_id = "d0";
    sen.index_in_doc = static_cast<int>(s);
    sen.index_in_cluster = static_cast<int>(s);
    for (int k : covers[s]) {
      sen.tokens.push_back("c" + std::to_string(k));
      c.concepts[static_cast<std::size_t>(k)].sentence_ids.push_back(static_cast<int>(s));
      c.concepts_by_sentence[s].push_back(k);
    }
    while (static_cast<int>(sen.tokens.size()) < lengths[s]) sen.tokens.push_back("pad");
    sen.content = sen.tokens;
    sen.length = lengths[s];
    sen.text = "";
    for (const auto& t : sen.tokens) sen.text += (sen.text.empty() ? "" : " ") + t;
    sen.text += ".";
    c.sentences.push_back(sen);
  }
  return c;
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sumrecom_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sumrecom::testing
