#include "sumrecom/rouge.hpp"

#include <algorithm>
#include <map>

#include "sumrecom/error.hpp"
#include "sumrecom/text.hpp"

namespace sumrecom {
namespace {

Tokens truncate(const Tokens& t, const std::optional<int>& limit) {
  if (!limit || static_cast<int>(t.size()) <= *limit) return t;
  return Tokens(t.begin(), t.begin() + std::max(0, *limit));
}

std::map<Tokens, int> ngram_counts(const Tokens& t, int n) {
  std::map<Tokens, int> counts;
  if (n <= 0 || static_cast<int>(t.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= t.size(); ++i) {
    ++counts[Tokens(t.begin() + static_cast<std::ptrdiff_t>(i),
                    t.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  }
  return counts;
}

double f1(double recall, double precision) {
  return recall + precision > 0.0 ? 2.0 * recall * precision / (recall + precision) : 0.0;
}

void require_refs(const std::vector<Tokens>& references) {
  if (references.empty()) fail(ErrorCode::kValidation, "ROUGE needs at least one reference");
}

}  // namespace

double rouge_n(const Tokens& candidate_in, const std::vector<Tokens>& references, int n,
               const RougeOptions& options) {
  require_refs(references);
  if (n < 1) fail(ErrorCode::kValidation, "ROUGE-N needs n >= 1");
  const auto candidate = truncate(candidate_in, options.truncation);
  const auto cand = ngram_counts(candidate, n);
  double cand_total = 0.0;
  for (const auto& [g, c] : cand) cand_total += c;

  double matched = 0.0, ref_total = 0.0;
  for (const auto& ref : references) {
    for (const auto& [gram, count] : ngram_counts(ref, n)) {
      ref_total += count;
      if (auto it = cand.find(gram); it != cand.end()) matched += std::min(count, it->second);
    }
  }
  const double recall = ref_total > 0.0 ? matched / ref_total : 0.0;
  if (options.mode == RougeMode::kRecall) return recall;
  const double precision =
      cand_total > 0.0 ? matched / (cand_total * static_cast<double>(references.size())) : 0.0;
  return f1(recall, precision);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& candidate_in, const std::vector<Tokens>& references,
               const RougeOptions& options) {
  require_refs(references);
  const auto candidate = truncate(candidate_in, options.truncation);
  double best = 0.0;
  for (const auto& ref : references) {
    if (ref.empty()) continue;
    const double lcs = static_cast<double>(lcs_length(candidate, ref));
    const double recall = lcs / static_cast<double>(ref.size());
    double value = recall;
    if (options.mode == RougeMode::kF1) {
      const double precision = candidate.empty() ? 0.0 : lcs / static_cast<double>(candidate.size());
      value = f1(recall, precision);
    }
    best = std::max(best, value);
  }
  return best;
}

RougeScore rouge(const Tokens& candidate, const std::vector<Tokens>& references,
                 const RougeOptions& options) {
  RougeScore s;
  s.mode = options.mode;
  s.truncation = options.truncation;
  s.rouge1 = rouge_n(candidate, references, 1, options);
  s.rouge2 = rouge_n(candidate, references, 2, options);
  s.rougeL = rouge_l(candidate, references, options);
  return s;
}

Tokens rouge_tokens(const std::string& text) { return text::tokenize(text); }

std::vector<Tokens> rouge_tokens(const std::vector<std::string>& texts) {
  std::vector<Tokens> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(text::tokenize(t));
  return out;
}

}  // namespace sumrecom
