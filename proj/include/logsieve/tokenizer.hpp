#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "logsieve/token.hpp"

namespace logsieve {

inline constexpr std::size_t kDefaultLruCapacity = 65536;

// Bounded least-recently-used map. Not thread safe; one per worker.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class LruCache {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

  const Value* find(const Key& key) {
    auto it = index_.find(key);
    if (it == index_.end()) {
      ++misses_;
      return nullptr;
    }
    ++hits_;
    entries_.splice(entries_.begin(), entries_, it->second);
    return &it->second->second;
  }

  const Value& insert(Key key, Value value) {
    auto it = index_.find(key);
    if (it != index_.end()) {
      it->second->second = std::move(value);
      entries_.splice(entries_.begin(), entries_, it->second);
      return it->second->second;
    }
    if (capacity_ == 0) {
      scratch_ = std::move(value);
      return scratch_;
    }
    if (entries_.size() >= capacity_) {
      index_.erase(entries_.back().first);
      entries_.pop_back();
    }
    entries_.emplace_front(std::move(key), std::move(value));
    index_.emplace(entries_.front().first, entries_.begin());
    return entries_.front().second;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  using Entry = std::pair<Key, Value>;
  std::size_t capacity_;
  std::list<Entry> entries_;
  std::unordered_map<Key, typename std::list<Entry>::iterator, Hash> index_;
  Value scratch_{};
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

// Splits one whitespace-free raw token into typed tokens. URLs and paths
// become a single Wildcard; otherwise the token is cut on non-alphanumeric
// characters and numbers, hex values and encoded blobs become Wildcards.
// Adjacent variable pieces merge, so the result never holds two Wildcards in
// a row. Empty input yields an empty sequence.
TokenSeq classify_token(std::string_view raw);

// Tokenizes a whole line. Returns nullopt for lines with no tokens (blank or
// punctuation only).
std::optional<Pattern> tokenize_line(std::string_view line);

// tokenize_line memoized through an LRU cache keyed by the raw line.
class Tokenizer {
 public:
  explicit Tokenizer(std::size_t cache_capacity = kDefaultLruCapacity)
      : cache_(cache_capacity) {}

  std::optional<Pattern> tokenize(std::string_view line);

  std::uint64_t cache_hits() const { return cache_.hits(); }
  std::uint64_t cache_misses() const { return cache_.misses(); }

 private:
  LruCache<std::string, std::optional<Pattern>> cache_;
};

// Unique preprocessed patterns of one input with their line frequencies.
// `source_lines` counts tokenizable lines only; `blank_lines` counts the rest.
struct PatternCounts {
  std::unordered_map<Pattern, std::uint64_t, PatternHash> entries;
  std::uint64_t source_lines = 0;
  std::uint64_t blank_lines = 0;

  void add(const Pattern& pattern, std::uint64_t count = 1);
  void merge(const PatternCounts& other);
  std::uint64_t total() const;
};

PatternCounts preprocess_lines(std::span<const std::string> lines,
                               Tokenizer& tokenizer);
PatternCounts preprocess_lines(std::span<const std::string> lines,
                               std::size_t cache_capacity = kDefaultLruCapacity);

// Reads every line of `in` (trailing '\r' stripped). Throws InputError with
// the byte offset at which reading failed.
std::vector<std::string> read_lines(std::istream& in);
std::vector<std::string> read_lines_from_file(const std::string& path);

PatternCounts preprocess_stream(std::istream& in, Tokenizer& tokenizer);

}  // namespace logsieve
