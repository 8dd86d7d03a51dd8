#include "logsieve/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "logsieve/errors.hpp"

namespace logsieve {

namespace {

bool is_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::size_t count_digits(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), is_digit));
}

bool is_url_or_path(std::string_view raw) {
  return raw.find("://") != std::string_view::npos ||
         std::count(raw.begin(), raw.end(), '/') >= 2;
}

// Long base64/hex-alphabet blobs: keys, digests, ids.
bool is_encoded_blob(std::string_view s) {
  if (s.size() < 16 || count_digits(s) < 2) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return is_alnum(c) || c == '+' || c == '/' || c == '=' || c == '-' ||
           c == '_';
  });
}

bool is_variable_piece(std::string_view piece) {
  if (std::all_of(piece.begin(), piece.end(), is_digit)) return true;
  if (piece.size() > 2 && piece[0] == '0' && (piece[1] == 'x' || piece[1] == 'X') &&
      std::all_of(piece.begin() + 2, piece.end(), is_hex))
    return true;
  if (std::all_of(piece.begin(), piece.end(), is_hex) && count_digits(piece) > 0)
    return true;
  return is_encoded_blob(piece);
}

}  // namespace

TokenSeq classify_token(std::string_view raw) {
  TokenSeq out;
  if (raw.empty()) return out;
  if (raw == kWildcardText || is_url_or_path(raw) || is_encoded_blob(raw)) {
    out.push_back(Token::wildcard());
    return out;
  }
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && !is_alnum(raw[i])) ++i;
    std::size_t start = i;
    while (i < raw.size() && is_alnum(raw[i])) ++i;
    if (start == i) break;
    std::string_view piece = raw.substr(start, i - start);
    if (is_variable_piece(piece)) {
      if (out.empty() || !out.back().is_wildcard())
        out.push_back(Token::wildcard());
    } else {
      out.push_back(Token::constant(std::string(piece)));
    }
  }
  return out;
}

std::optional<Pattern> tokenize_line(std::string_view line) {
  Pattern pattern;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (start == i) break;
    for (Token& t : classify_token(line.substr(start, i - start))) {
      if (t.is_wildcard() && !pattern.tokens.empty() &&
          pattern.tokens.back().is_wildcard())
        continue;
      pattern.tokens.push_back(std::move(t));
    }
  }
  if (pattern.tokens.empty()) return std::nullopt;
  return pattern;
}

std::optional<Pattern> Tokenizer::tokenize(std::string_view line) {
  std::string key(line);
  if (const auto* hit = cache_.find(key)) return *hit;
  return cache_.insert(std::move(key), tokenize_line(line));
}

void PatternCounts::add(const Pattern& pattern, std::uint64_t count) {
  entries[pattern] += count;
  source_lines += count;
}

void PatternCounts::merge(const PatternCounts& other) {
  for (const auto& [pattern, count] : other.entries) entries[pattern] += count;
  source_lines += other.source_lines;
  blank_lines += other.blank_lines;
}

std::uint64_t PatternCounts::total() const {
  std::uint64_t sum = 0;
  for (const auto& [pattern, count] : entries) sum += count;
  return sum;
}

PatternCounts preprocess_lines(std::span<const std::string> lines,
                               Tokenizer& tokenizer) {
  PatternCounts counts;
  for (const std::string& line : lines) {
    if (auto pattern = tokenizer.tokenize(line)) {
      counts.add(*pattern);
    } else {
      ++counts.blank_lines;
    }
  }
  return counts;
}

PatternCounts preprocess_lines(std::span<const std::string> lines,
                               std::size_t cache_capacity) {
  Tokenizer tokenizer(cache_capacity);
  return preprocess_lines(lines, tokenizer);
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw InputError("read failed", InputError::Position::kByteOffset, offset);
  return lines;
}

std::vector<std::string> read_lines_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  try {
    return read_lines(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.message(), e.position(), e.offset());
  }
}

PatternCounts preprocess_stream(std::istream& in, Tokenizer& tokenizer) {
  const auto lines = read_lines(in);
  return preprocess_lines(lines, tokenizer);
}

}  // namespace logsieve
