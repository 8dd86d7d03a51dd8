#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace logsieve {

enum class TokenKind : std::uint8_t { kConstant = 0, kWildcard = 1, kGap = 2 };

// Rendering of a Wildcard in text form. Constants are alphanumeric, so the
// reserved symbol never collides with a constant.
inline constexpr std::string_view kWildcardText = "*";
// Rendering of a Gap in debugging output only; gaps never reach model files.
inline constexpr std::string_view kGapText = "<gap>";

struct Token {
  TokenKind kind = TokenKind::kConstant;
  std::string text;  // empty unless kind == kConstant

  static Token constant(std::string text) {
    return Token{TokenKind::kConstant, std::move(text)};
  }
  static Token wildcard() { return Token{TokenKind::kWildcard, {}}; }
  static Token gap() { return Token{TokenKind::kGap, {}}; }

  bool is_constant() const { return kind == TokenKind::kConstant; }
  bool is_wildcard() const { return kind == TokenKind::kWildcard; }
  bool is_gap() const { return kind == TokenKind::kGap; }

  std::string_view render() const {
    switch (kind) {
      case TokenKind::kConstant: return text;
      case TokenKind::kWildcard: return kWildcardText;
      case TokenKind::kGap: return kGapText;
    }
    return {};
  }

  // Orders Constant < Wildcard < Gap, then by text.
  friend auto operator<=>(const Token&, const Token&) = default;
  friend bool operator==(const Token&, const Token&) = default;
};

using TokenSeq = std::vector<Token>;

// A typed token sequence with no Gaps and no two adjacent Wildcards.
struct Pattern {
  TokenSeq tokens;

  std::size_t length() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  friend auto operator<=>(const Pattern&, const Pattern&) = default;
  friend bool operator==(const Pattern&, const Pattern&) = default;
};

// Space-joined rendering, "*" for wildcards.
std::string render(const Pattern& pattern);
std::string render(const TokenSeq& tokens);

// Drops Gaps and collapses runs of Wildcards.
Pattern normalize(const TokenSeq& tokens);

// True if `pattern` has no Gaps, no adjacent Wildcards and no empty or
// whitespace-bearing constants.
bool is_well_formed(const Pattern& pattern);

std::uint64_t hash_value(const Token& token);
std::uint64_t hash_value(const Pattern& pattern);

struct PatternHash {
  std::size_t operator()(const Pattern& p) const {
    return static_cast<std::size_t>(hash_value(p));
  }
};

struct TokenHash {
  std::size_t operator()(const Token& t) const {
    return static_cast<std::size_t>(hash_value(t));
  }
};

}  // namespace logsieve
