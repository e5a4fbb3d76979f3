#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sumrecom {

using Tokens = std::vector<std::string>;

enum class RougeMode { kRecall, kF1 };

struct RougeOptions {
  RougeMode mode = RougeMode::kRecall;
  // Candidate is cut to this many tokens before scoring.
  std::optional<int> truncation = 75;
};

struct RougeScore {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  RougeMode mode = RougeMode::kRecall;
  std::optional<int> truncation;
};

/// Clipped n-gram matches summed over references, divided by the total
/// reference n-gram count (F1 mode combines that recall with precision).
double rouge_n(const Tokens& candidate, const std::vector<Tokens>& references, int n,
               const RougeOptions& options = {.mode = RougeMode::kRecall, .truncation = std::nullopt});

/// LCS length over reference length, maximized over references.
double rouge_l(const Tokens& candidate, const std::vector<Tokens>& references,
               const RougeOptions& options = {.mode = RougeMode::kRecall, .truncation = std::nullopt});

std::size_t lcs_length(const Tokens& a, const Tokens& b);

RougeScore rouge(const Tokens& candidate, const std::vector<Tokens>& references,
                 const RougeOptions& options = {});

/// Tokenizes raw text for scoring (lowercase, no stopword removal).
Tokens rouge_tokens(const std::string& text);
std::vector<Tokens> rouge_tokens(const std::vector<std::string>& texts);

}  // namespace sumrecom
