#include "sumrecom/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "background.hpp"
#include "sumrecom/error.hpp"
#include "sumrecom/text.hpp"

namespace sumrecom {
namespace fs = std::filesystem;

std::string_view to_string(ConceptUnit unit) {
  switch (unit) {
    case ConceptUnit::kUnigram: return "unigram";
    case ConceptUnit::kBigram: return "bigram";
    case ConceptUnit::kSentence: return "sentence";
  }
  return "unigram";
}

ConceptUnit parse_concept_unit(std::string_view name) {
  if (name == "unigram") return ConceptUnit::kUnigram;
  if (name == "bigram") return ConceptUnit::kBigram;
  if (name == "sentence") return ConceptUnit::kSentence;
  fail(ErrorCode::kValidation, "unknown concept unit '" + std::string(name) + "'");
}

namespace {

// Content-token units of a sentence at the requested granularity, in order of
// appearance (duplicates kept).
std::vector<std::vector<std::string>> units_of(const Sentence& s, ConceptUnit unit) {
  std::vector<std::vector<std::string>> out;
  switch (unit) {
    case ConceptUnit::kUnigram:
      for (const auto& tok : s.content) out.push_back({tok});
      break;
    case ConceptUnit::kBigram:
      for (std::size_t i = 0; i + 1 < s.content.size(); ++i) {
        out.push_back({s.content[i], s.content[i + 1]});
      }
      break;
    case ConceptUnit::kSentence:
      out.push_back(s.tokens);
      break;
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, "error reading " + path.string());
  return ss.str();
}

std::vector<fs::path> sorted_txt_files(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  if (ec) fail(ErrorCode::kIo, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

DocumentCluster build_cluster(const ClusterInput& input, ConceptUnit unit) {
  DocumentCluster cluster;
  cluster.id = input.id;
  cluster.unit = unit;
  cluster.references = input.references;

  for (const auto& doc : input.documents) {
    Document d;
    d.id = doc.id;
    d.first_sentence = static_cast<SentenceId>(cluster.sentences.size());
    std::vector<Sentence> doc_sentences;
    for (auto& raw : text::split_sentences(doc.text)) {
      Sentence s;
      s.tokens = text::tokenize(raw);
      if (s.tokens.empty()) continue;
      s.doc_id = doc.id;
      s.text = std::move(raw);
      s.content = text::content_tokens(s.tokens);
      s.length = static_cast<int>(s.tokens.size());
      doc_sentences.push_back(std::move(s));
    }
    const auto n = doc_sentences.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = doc_sentences[i];
      s.index_in_doc = static_cast<int>(i);
      s.index_in_cluster = static_cast<SentenceId>(cluster.sentences.size());
      s.position_ratio = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
      cluster.sentences.push_back(std::move(s));
    }
    d.sentence_count = static_cast<int>(n);
    cluster.documents.push_back(std::move(d));
  }
  if (cluster.sentences.empty()) {
    fail(ErrorCode::kValidation, "cluster '" + input.id + "' contains no sentences");
  }

  std::map<std::vector<std::string>, ConceptId> index;
  cluster.concepts_by_sentence.resize(cluster.sentences.size());
  for (const auto& s : cluster.sentences) {
    for (auto& unit_tokens : units_of(s, unit)) {
      auto [it, inserted] =
          index.try_emplace(unit_tokens, static_cast<ConceptId>(cluster.concepts.size()));
      if (inserted) {
        Concept c;
        c.id = it->second;
        c.unit = unit;
        c.surface = text::join(unit_tokens);
        c.tokens = std::move(unit_tokens);
        cluster.concepts.push_back(std::move(c));
      }
      auto& ids = cluster.concepts[it->second].sentence_ids;
      if (ids.empty() || ids.back() != s.index_in_cluster) ids.push_back(s.index_in_cluster);
      auto& per_sentence = cluster.concepts_by_sentence[s.index_in_cluster];
      if (std::find(per_sentence.begin(), per_sentence.end(), it->second) == per_sentence.end()) {
        per_sentence.push_back(it->second);
      }
    }
  }
  for (auto& ids : cluster.concepts_by_sentence) std::sort(ids.begin(), ids.end());
  if (cluster.concepts.empty()) {
    fail(ErrorCode::kValidation, "cluster '" + input.id + "' yields no concepts");
  }
  return cluster;
}

ClusterInput read_cluster_input(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::kIo, "no such file or directory: " + path.string());

  ClusterInput input;
  if (fs::is_directory(path)) {
    input.id = path.filename().string();
    if (input.id.empty()) input.id = path.parent_path().filename().string();
    const auto docs_dir = fs::is_directory(path / "docs") ? path / "docs" : path;
    for (const auto& file : sorted_txt_files(docs_dir)) {
      input.documents.push_back({file.stem().string(), read_file(file)});
    }
    if (fs::is_directory(path / "refs")) {
      for (const auto& file : sorted_txt_files(path / "refs")) {
        input.references.push_back(read_file(file));
      }
    }
  } else {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
      input.id = j.at("id").get<std::string>();
      for (const auto& d : j.at("documents")) {
        input.documents.push_back({d.at("id").get<std::string>(), d.at("text").get<std::string>()});
      }
      if (j.contains("references")) {
        input.references = j.at("references").get<std::vector<std::string>>();
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kValidation, "malformed cluster file " + path.string() + ": " + e.what());
    }
  }
  if (input.documents.empty()) {
    fail(ErrorCode::kValidation, "cluster at " + path.string() + " has no documents");
  }
  return input;
}

DocumentCluster ingest_cluster(const fs::path& path, ConceptUnit unit) {
  return featurize_concepts(build_cluster(read_cluster_input(path), unit));
}

std::int64_t count_candidate_pairs(std::int64_t n) {
  if (n < 2) fail(ErrorCode::kValidation, "need at least two concepts to form a pair");
  return n * (n - 1) / 2;
}

std::int64_t count_candidate_pairs(const DocumentCluster& cluster) {
  return count_candidate_pairs(static_cast<std::int64_t>(cluster.concepts.size()));
}

const std::vector<std::string>& concept_feature_names() {
  static const std::vector<std::string> kNames = {
      "tfidf",       "doc_freq", "cooccurrence",    "uppercase", "signature",
      "embed_cosine", "position", "sentence_length", "unit_length"};
  return kNames;
}

double signature_score(const std::string& term, std::int64_t cluster_count,
                       std::int64_t cluster_total) {
  if (cluster_count <= 0 || cluster_total <= 0) return 0.0;
  const double k1 = static_cast<double>(cluster_count);
  const double n1 = static_cast<double>(cluster_total);
  // Half-count smoothing keeps unseen background terms finite.
  const double k2 = static_cast<double>(detail::background_count(term)) + 0.5;
  const double n2 = static_cast<double>(detail::kBackgroundTotal) + 0.5;
  const double p1 = k1 / n1;
  const double p2 = k2 / n2;
  if (p1 <= p2) return 0.0;
  const double p = (k1 + k2) / (n1 + n2);
  auto ll = [](double k, double n, double q) {
    double v = 0.0;
    if (k > 0) v += k * std::log(q);
    if (n - k > 0) v += (n - k) * std::log1p(-q);
    return v;
  };
  return 2.0 * (ll(k1, n1, p1) + ll(k2, n2, p2) - ll(k1, n1, p) - ll(k2, n2, p));
}

std::vector<std::vector<double>> raw_concept_features(const DocumentCluster& cluster,
                                                      const EmbeddingTable* embeddings) {
  const std::size_t n = cluster.concepts.size();
  const double num_docs = static_cast<double>(cluster.documents.size());
  std::vector<std::vector<double>> rows(n, std::vector<double>(kNumConceptFeatures, 0.0));

  // Occurrence counts per concept, recounted from the sentence units.
  std::map<std::vector<std::string>, ConceptId> index;
  for (const auto& c : cluster.concepts) index.emplace(c.tokens, c.id);
  std::vector<double> tf(n, 0.0);
  for (const auto& s : cluster.sentences) {
    for (const auto& u : units_of(s, cluster.unit)) {
      if (auto it = index.find(u); it != index.end()) tf[it->second] += 1.0;
    }
  }

  std::unordered_map<std::string, std::int64_t> word_counts;
  std::int64_t word_total = 0;
  for (const auto& s : cluster.sentences) {
    for (const auto& tok : s.content) {
      ++word_counts[tok];
      ++word_total;
    }
  }

  // Capitalized tokens that are not sentence-initial.
  std::set<std::string> capitalized;
  for (const auto& s : cluster.sentences) {
    const auto raw = text::tokenize_raw(s.text);
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (std::isupper(static_cast<unsigned char>(raw[i].front()))) {
        auto lower = raw[i];
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        capitalized.insert(std::move(lower));
      }
    }
  }

  std::vector<std::vector<double>> vectors(n);
  std::vector<double> centroid;
  std::size_t with_vec = 0;
  if (embeddings && !embeddings->empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = cluster.concepts[i];
      const auto& words = c.unit == ConceptUnit::kSentence
                              ? cluster.sentences[c.sentence_ids.front()].content
                              : c.tokens;
      vectors[i] = mean_vector(*embeddings, words);
      if (vectors[i].empty()) continue;
      if (centroid.empty()) centroid.assign(vectors[i].size(), 0.0);
      for (std::size_t k = 0; k < centroid.size(); ++k) centroid[k] += vectors[i][k];
      ++with_vec;
    }
    for (double& x : centroid) x /= static_cast<double>(std::max<std::size_t>(with_vec, 1));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = cluster.concepts[i];
    auto& row = rows[i];

    std::set<std::string> docs;
    std::set<ConceptId> neighbours;
    double min_pos = 1.0;
    double len_sum = 0.0;
    for (SentenceId sid : c.sentence_ids) {
      const auto& s = cluster.sentences[sid];
      docs.insert(s.doc_id);
      for (ConceptId other : cluster.concepts_by_sentence[sid]) {
        if (other != c.id) neighbours.insert(other);
      }
      min_pos = std::min(min_pos, s.position_ratio);
      len_sum += s.length;
    }
    const double df = static_cast<double>(docs.size());

    row[kTfIdf] = tf[i] * std::log(num_docs / df);
    row[kDocFreq] = df / num_docs;
    row[kCooccurrence] = static_cast<double>(neighbours.size());

    const auto& words = c.unit == ConceptUnit::kSentence
                            ? cluster.sentences[c.sentence_ids.front()].content
                            : c.tokens;
    row[kUppercase] = 0.0;
    for (const auto& w : words) {
      if (capitalized.count(w)) row[kUppercase] = 1.0;
    }
    double sig = 0.0;
    for (const auto& w : words) {
      auto it = word_counts.find(w);
      sig += signature_score(w, it == word_counts.end() ? 0 : it->second, word_total);
    }
    row[kSignature] = words.empty() ? 0.0 : sig / static_cast<double>(words.size());
    row[kEmbeddingCentroid] = vectors[i].empty() ? 0.0 : cosine(vectors[i], centroid);
    row[kPosition] = min_pos;
    row[kSentenceLength] = len_sum / static_cast<double>(c.sentence_ids.size());
    row[kUnitLength] = static_cast<double>(c.tokens.size());
  }
  return rows;
}

void min_max_normalize(std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return;
  const std::size_t dims = rows.front().size();
  for (std::size_t k = 0; k < dims; ++k) {
    double lo = rows.front()[k], hi = rows.front()[k];
    for (const auto& r : rows) {
      lo = std::min(lo, r[k]);
      hi = std::max(hi, r[k]);
    }
    const double span = hi - lo;
    for (auto& r : rows) r[k] = span > 0.0 ? (r[k] - lo) / span : 0.0;
  }
}

DocumentCluster featurize_concepts(DocumentCluster cluster, const EmbeddingTable* embeddings) {
  auto rows = raw_concept_features(cluster, embeddings);
  min_max_normalize(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    cluster.concepts[i].features.values = std::move(rows[i]);
  }
  cluster.feature_names = concept_feature_names();
  return cluster;
}

DocumentCluster select_features(DocumentCluster cluster, const std::vector<std::size_t>& columns) {
  std::vector<std::string> names;
  for (auto col : columns) {
    if (col >= cluster.feature_names.size()) {
      fail(ErrorCode::kValidation, "feature column " + std::to_string(col) + " out of range");
    }
    names.push_back(cluster.feature_names[col]);
  }
  for (auto& c : cluster.concepts) {
    std::vector<double> picked;
    picked.reserve(columns.size());
    for (auto col : columns) picked.push_back(c.features.values[col]);
    c.features.values = std::move(picked);
  }
  cluster.feature_names = std::move(names);
  return cluster;
}

}  // namespace sumrecom
