#include "sumrecom/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sumrecom/error.hpp"

namespace sumrecom {

EmbeddingTable EmbeddingTable::parse(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string word;
    if (!(row >> word)) continue;
    std::vector<double> vec;
    std::string field;
    while (row >> field) {
      try {
        vec.push_back(std::stod(field));
      } catch (const std::exception&) {
        fail(ErrorCode::kValidation,
             "embedding line " + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (vec.empty()) {
      fail(ErrorCode::kValidation, "embedding line " + std::to_string(line_no) + ": no values");
    }
    if (table.rows_.empty() && table.dim_ == 0) table.dim_ = vec.size();
    table.add(word, std::move(vec));
  }
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read embedding file " + path.string());
  return parse(in);
}

void EmbeddingTable::add(const std::string& word, std::vector<double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    fail(ErrorCode::kValidation, "embedding for '" + word + "' has dimension " +
                                     std::to_string(vec.size()) + ", expected " +
                                     std::to_string(dim_));
  }
  for (double v : vec) {
    if (!std::isfinite(v)) fail(ErrorCode::kValidation, "non-finite embedding for '" + word + "'");
  }
  rows_[word] = std::move(vec);
}

const std::vector<double>* EmbeddingTable::find(const std::string& word) const {
  auto it = rows_.find(word);
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<double> mean_vector(const EmbeddingTable& table, std::span<const std::string> words) {
  std::vector<double> sum;
  std::size_t hits = 0;
  for (const auto& w : words) {
    const auto* v = table.find(w);
    if (!v) continue;
    if (sum.empty()) sum.assign(v->size(), 0.0);
    for (std::size_t i = 0; i < v->size(); ++i) sum[i] += (*v)[i];
    ++hits;
  }
  for (double& x : sum) x /= static_cast<double>(hits);
  return sum;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty() || a.size() != b.size()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace sumrecom
