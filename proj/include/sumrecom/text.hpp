#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sumrecom::text {

/// Splits raw text into sentences at `.`, `!` or `?` followed by whitespace
/// (or end of input). Returned sentences are trimmed; empty ones are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Lowercased alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

/// Alphanumeric runs with original casing.
std::vector<std::string> tokenize_raw(std::string_view text);

bool is_stopword(std::string_view token);

/// Drops stopwords, keeping order.
std::vector<std::string> content_tokens(const std::vector<std::string>& tokens);

/// Strips one of the suffixes `ing`, `ed`, `es`, `s` when at least three
/// characters remain.
std::string stem(std::string_view token);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

}  // namespace sumrecom::text
