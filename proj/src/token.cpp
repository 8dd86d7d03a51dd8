#include "logsieve/token.hpp"

#include "logsieve/hash.hpp"

namespace logsieve {

std::string render(const TokenSeq& tokens) {
  std::string out;
  for (const Token& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out.append(t.render());
  }
  return out;
}

std::string render(const Pattern& pattern) { return render(pattern.tokens); }

Pattern normalize(const TokenSeq& tokens) {
  Pattern out;
  out.tokens.reserve(tokens.size());
  for (const Token& t : tokens) {
    if (t.is_gap()) continue;
    if (t.is_wildcard() && !out.tokens.empty() && out.tokens.back().is_wildcard())
      continue;
    out.tokens.push_back(t);
  }
  return out;
}

bool is_well_formed(const Pattern& pattern) {
  if (pattern.tokens.empty()) return false;
  bool prev_wild = false;
  for (const Token& t : pattern.tokens) {
    switch (t.kind) {
      case TokenKind::kGap:
        return false;
      case TokenKind::kWildcard:
        if (prev_wild || !t.text.empty()) return false;
        prev_wild = true;
        break;
      case TokenKind::kConstant:
        if (t.text.empty()) return false;
        for (char c : t.text)
          if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
        prev_wild = false;
        break;
    }
  }
  return true;
}

std::uint64_t hash_value(const Token& token) {
  return hash_bytes(token.text, static_cast<std::uint64_t>(token.kind) + 1);
}

std::uint64_t hash_value(const Pattern& pattern) {
  std::uint64_t h = 0x84222325cbf29ce4ULL ^ pattern.tokens.size();
  for (const Token& t : pattern.tokens) h = hash_combine(h, hash_value(t));
  return h;
}

}  // namespace logsieve
