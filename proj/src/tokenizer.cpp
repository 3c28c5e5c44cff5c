#include "dnagpt/tokenizer.hpp"

#include <locale>
#include <optional>

#include "dnagpt/error.hpp"

namespace dnagpt {
namespace {

bool is_unicode_space(char32_t c) {
  switch (c) {
    case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
    case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Decodes one code point starting at text[i]. Malformed sequences decode as
// a single byte so that the tokenizer stays total.
char32_t decode_utf8(std::string_view text, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  auto cont = [&](std::size_t k) -> std::optional<unsigned char> {
    if (i + k >= text.size()) return std::nullopt;
    const auto b = static_cast<unsigned char>(text[i + k]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    return b & 0x3F;
  };
  std::size_t len = 1;
  char32_t cp = b0;
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    len = 2;
    cp = b0 & 0x1F;
  } else if (b0 >= 0xE0 && b0 <= 0xEF) {
    len = 3;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xF0 && b0 <= 0xF4) {
    len = 4;
    cp = b0 & 0x07;
  }
  for (std::size_t k = 1; k < len; ++k) {
    auto c = cont(k);
    if (!c) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | *c;
  }
  i += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::ctype<wchar_t>* unicode_ctype() {
  static const std::optional<std::locale> loc = []() -> std::optional<std::locale> {
    for (const char* name : {"C.UTF-8", "C.utf8", "en_US.UTF-8"}) {
      try {
        return std::locale(name);
      } catch (const std::runtime_error&) {
      }
    }
    return std::nullopt;
  }();
  return loc ? &std::use_facet<std::ctype<wchar_t>>(*loc) : nullptr;
}

char32_t fold_case(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'A' && cp <= 'Z') ? cp + ('a' - 'A') : cp;
  }
  if (const auto* ct = unicode_ctype(); ct && sizeof(wchar_t) == 4) {
    return static_cast<char32_t>(ct->tolower(static_cast<wchar_t>(cp)));
  }
  return cp;
}

}  // namespace

TokenizeMode parse_tokenize_mode(std::string_view name) {
  if (name == "whitespace-lower" || name == "lower") return TokenizeMode::kWhitespaceLower;
  if (name == "whitespace-exact" || name == "exact") return TokenizeMode::kWhitespaceExact;
  throw InvalidArgument("unknown tokenize mode: " + std::string(name));
}

std::string_view to_string(TokenizeMode mode) {
  return mode == TokenizeMode::kWhitespaceLower ? "whitespace-lower" : "whitespace-exact";
}

TokenSequence tokenize(std::string_view text, TokenizeMode mode) {
  TokenSequence seq;
  seq.source_text = std::string(text);
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const char32_t cp = decode_utf8(text, i);
    if (is_unicode_space(cp)) {
      if (!current.empty()) seq.tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (mode == TokenizeMode::kWhitespaceLower) {
      encode_utf8(fold_case(cp), current);
    } else {
      current.append(text.substr(start, i - start));
    }
  }
  if (!current.empty()) seq.tokens.push_back(std::move(current));
  return seq;
}

TokenSequence from_tokens(std::vector<std::string> tokens) {
  TokenSequence seq;
  seq.tokens = std::move(tokens);
  seq.source_text = seq.joined();
  return seq;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string TokenSequence::joined() const { return join_tokens(tokens); }

TokenSequence TokenSequence::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > tokens.size()) throw InvalidArgument("slice out of range");
  return from_tokens({tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                      tokens.begin() + static_cast<std::ptrdiff_t>(end)});
}

}  // namespace dnagpt
