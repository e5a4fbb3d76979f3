#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sumrecom {

/// Word vectors read from a `word v1 ... vd` text file. Every row must share
/// the same dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  static EmbeddingTable parse(std::istream& in);
  static EmbeddingTable load(const std::filesystem::path& path);

  void add(const std::string& word, std::vector<double> vec);

  const std::vector<double>* find(const std::string& word) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  // Ordered by word so serialization is stable.
  const std::map<std::string, std::vector<double>>& rows() const { return rows_; }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> rows_;
};

/// Mean of the vectors of `words` found in `table`; empty when none are found.
std::vector<double> mean_vector(const EmbeddingTable& table, std::span<const std::string> words);

/// Cosine similarity; 0 when either vector is empty or zero.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace sumrecom
