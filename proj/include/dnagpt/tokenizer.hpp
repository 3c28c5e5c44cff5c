#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dnagpt {

enum class TokenizeMode {
  kWhitespaceLower,  // split on Unicode whitespace, case-fold each token
  kWhitespaceExact,  // split on Unicode whitespace, keep bytes as-is
};

TokenizeMode parse_tokenize_mode(std::string_view name);
std::string_view to_string(TokenizeMode mode);

// A tokenized text. Punctuation stays attached to the neighbouring word, so
// "sat." is a single token.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source_text;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }

  // Tokens joined with single spaces.
  std::string joined() const;
  TokenSequence slice(std::size_t begin, std::size_t end) const;
};

TokenSequence tokenize(std::string_view text,
                       TokenizeMode mode = TokenizeMode::kWhitespaceLower);

TokenSequence from_tokens(std::vector<std::string> tokens);

std::string join_tokens(std::span<const std::string> tokens);

}  // namespace dnagpt
