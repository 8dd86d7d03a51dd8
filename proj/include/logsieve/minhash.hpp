#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "logsieve/token.hpp"

namespace logsieve {

// Sorted, deduplicated token n-grams (tokens joined by a single space).
struct ShingleSet {
  std::vector<std::string> shingles;
  std::size_t n = 2;

  std::size_t size() const { return shingles.size(); }
  bool empty() const { return shingles.empty(); }
  bool operator==(const ShingleSet&) const = default;
};

// Sliding-window n-grams over rendered tokens. Sequences shorter than n give
// one shingle holding the whole sequence.
ShingleSet shingle(const TokenSeq& tokens, std::size_t n);
inline ShingleSet shingle(const Pattern& p, std::size_t n) {
  return shingle(p.tokens, n);
}

// Base hashes of each shingle, the element type the signer works on.
std::vector<std::uint64_t> shingle_hashes(const ShingleSet& set);

struct MinHashSignature {
  std::vector<std::uint64_t> values;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
  bool operator==(const MinHashSignature&) const = default;
};

// A family of num_permutations hash functions derived from one seed. Each
// permutation is an affine map of the 64-bit base hash followed by a
// finalizer.
class MinHasher {
 public:
  MinHasher(std::size_t num_permutations, std::uint64_t seed);

  // Throws UsageError on an empty element set.
  MinHashSignature sign(std::span<const std::uint64_t> element_hashes) const;
  MinHashSignature sign(const ShingleSet& set) const;

  std::size_t num_permutations() const { return mul_.size(); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> mul_;
  std::vector<std::uint64_t> add_;
};

MinHashSignature minhash_signature(const ShingleSet& set,
                                   std::size_t num_permutations,
                                   std::uint64_t seed);

// Fraction of agreeing positions. Throws UsageError on length or seed
// mismatch.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

double exact_jaccard(const ShingleSet& a, const ShingleSet& b);

struct BandLayout {
  std::size_t bands = 1;
  std::size_t rows = 1;

  // Jaccard value at the S-curve inflection, (1/b)^(1/r).
  double inflection() const;
  // Probability that a pair with Jaccard `j` shares at least one band.
  double candidate_probability(double j) const;
};

// Divisor pair of num_permutations whose inflection is closest to threshold.
BandLayout choose_bands(std::size_t num_permutations, double threshold);

// Banded bucket index from signature bands to caller-chosen keys.
class LshIndex {
 public:
  using Key = std::size_t;

  LshIndex(std::size_t num_permutations, double threshold, std::uint64_t seed);

  // Returns true if `key` was already present and has been replaced.
  bool insert(Key key, const MinHashSignature& sig);
  // Sorted, deduplicated keys sharing at least one band bucket with `sig`.
  std::vector<Key> query(const MinHashSignature& sig) const;

  // After freeze() inserts throw; concurrent queries are safe.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  const BandLayout& layout() const { return layout_; }
  double threshold() const { return threshold_; }
  std::size_t size() const { return band_keys_.size(); }

  // Bucket contents, for block formation.
  template <typename Fn>
  void for_each_bucket(Fn&& fn) const {
    for (const auto& band : buckets_)
      for (const auto& [hash, keys] : band) fn(keys);
  }

 private:
  void check(const MinHashSignature& sig) const;
  std::vector<std::uint64_t> band_hashes(const MinHashSignature& sig) const;

  BandLayout layout_;
  double threshold_;
  std::size_t num_permutations_;
  std::uint64_t seed_;
  bool frozen_ = false;
  std::vector<std::unordered_map<std::uint64_t, std::vector<Key>>> buckets_;
  std::unordered_map<Key, std::vector<std::uint64_t>> band_keys_;
};

// Partitions indices [0, signatures.size()) into connected components of the
// shared-bucket graph. Blocks are ordered by their smallest index and hold
// ascending indices, so the result depends only on signature order.
std::vector<std::vector<std::size_t>> lsh_blocks(
    std::span<const MinHashSignature> signatures, double threshold);

}  // namespace logsieve
