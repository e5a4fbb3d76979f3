#include "sumrecom/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace sumrecom::text {
namespace {

// Fixed English function-word list. Single letters are deliberately absent so
// that one-letter tokens still count as content words.
constexpr std::string_view kStopwords[] = {
    "about", "above", "after", "again", "against", "all", "also", "am", "an",
    "and", "any", "are", "as", "at", "be", "because", "been", "before",
    "being", "below", "between", "both", "but", "by", "can", "could", "did",
    "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "if", "in", "into", "is", "it",
    "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor",
    "not", "now", "of", "off", "on", "once", "only", "or", "other", "our",
    "ours", "out", "over", "own", "same", "she", "should", "so", "some",
    "such", "than", "that", "the", "their", "theirs", "them", "then", "there",
    "these", "they", "this", "those", "through", "to", "too", "under", "until",
    "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your",
    "yours"};

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool boundary = i + 1 == text.size() || is_space(text[i + 1]);
    if (!boundary) continue;
    auto piece = trim(text.substr(start, i + 1 - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = i + 1;
  }
  if (start < text.size()) {
    auto piece = trim(text.substr(start));
    if (!piece.empty()) out.emplace_back(piece);
  }
  return out;
}

std::vector<std::string> tokenize_raw(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (is_alnum(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  auto out = tokenize_raw(text);
  for (auto& tok : out) {
    std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
  }
  return out;
}

bool is_stopword(std::string_view token) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), token) != std::end(kStopwords);
}

std::vector<std::string> content_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (!is_stopword(tok)) out.push_back(tok);
  }
  return out;
}

std::string stem(std::string_view token) {
  static constexpr std::array<std::string_view, 4> kSuffixes = {"ing", "ed", "es", "s"};
  for (auto suffix : kSuffixes) {
    if (token.size() >= suffix.size() + 3 && token.ends_with(suffix)) {
      return std::string(token.substr(0, token.size() - suffix.size()));
    }
  }
  return std::string(token);
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

}  // namespace sumrecom::text
