#include "logsieve/minhash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "logsieve/errors.hpp"
#include "logsieve/hash.hpp"

namespace logsieve {

ShingleSet shingle(const TokenSeq& tokens, std::size_t n) {
  if (n == 0) throw UsageError("shingle width must be >= 1");
  ShingleSet set;
  set.n = n;
  if (tokens.empty()) return set;
  const std::size_t width = std::min(n, tokens.size());
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    std::string s;
    for (std::size_t j = i; j < i + width; ++j) {
      if (j != i) s.push_back(' ');
      s.append(tokens[j].render());
    }
    set.shingles.push_back(std::move(s));
  }
  std::sort(set.shingles.begin(), set.shingles.end());
  set.shingles.erase(std::unique(set.shingles.begin(), set.shingles.end()),
                     set.shingles.end());
  return set;
}

std::vector<std::uint64_t> shingle_hashes(const ShingleSet& set) {
  std::vector<std::uint64_t> out;
  out.reserve(set.shingles.size());
  for (const auto& s : set.shingles) out.push_back(hash_bytes(s));
  return out;
}

MinHasher::MinHasher(std::size_t num_permutations, std::uint64_t seed)
    : seed_(seed), mul_(num_permutations), add_(num_permutations) {
  if (num_permutations == 0) throw UsageError("num_permutations must be >= 1");
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < num_permutations; ++i) {
    mul_[i] = splitmix64(state) | 1ULL;
    add_[i] = splitmix64(state);
  }
}

MinHashSignature MinHasher::sign(
    std::span<const std::uint64_t> element_hashes) const {
  if (element_hashes.empty())
    throw UsageError("cannot compute a minhash signature of an empty set");
  MinHashSignature sig;
  sig.seed = seed_;
  sig.values.assign(mul_.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t x : element_hashes) {
    for (std::size_t i = 0; i < mul_.size(); ++i) {
      const std::uint64_t h = fmix64(mul_[i] * x + add_[i]);
      if (h < sig.values[i]) sig.values[i] = h;
    }
  }
  return sig;
}

MinHashSignature MinHasher::sign(const ShingleSet& set) const {
  const auto hashes = shingle_hashes(set);
  return sign(hashes);
}

MinHashSignature minhash_signature(const ShingleSet& set,
                                   std::size_t num_permutations,
                                   std::uint64_t seed) {
  return MinHasher(num_permutations, seed).sign(set);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.size() != b.size())
    throw UsageError("signature length mismatch: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  if (a.seed != b.seed) throw UsageError("signature seed mismatch");
  if (a.values.empty()) throw UsageError("empty signature");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) agree += a.values[i] == b.values[i];
  return static_cast<double>(agree) / static_cast<double>(a.size());
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::string> inter;
  std::set_intersection(a.shingles.begin(), a.shingles.end(), b.shingles.begin(),
                        b.shingles.end(), std::back_inserter(inter));
  const double uni = static_cast<double>(a.size() + b.size() - inter.size());
  return static_cast<double>(inter.size()) / uni;
}

double BandLayout::inflection() const {
  return std::pow(1.0 / static_cast<double>(bands),
                  1.0 / static_cast<double>(rows));
}

double BandLayout::candidate_probability(double j) const {
  return 1.0 - std::pow(1.0 - std::pow(j, static_cast<double>(rows)),
                        static_cast<double>(bands));
}

BandLayout choose_bands(std::size_t num_permutations, double threshold) {
  if (num_permutations == 0) throw UsageError("num_permutations must be >= 1");
  BandLayout best{num_permutations, 1};
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t b = 1; b <= num_permutations; ++b) {
    if (num_permutations % b != 0) continue;
    BandLayout candidate{b, num_permutations / b};
    const double err = std::abs(candidate.inflection() - threshold);
    if (err < best_err) {
      best_err = err;
      best = candidate;
    }
  }
  return best;
}

LshIndex::LshIndex(std::size_t num_permutations, double threshold,
                   std::uint64_t seed)
    : layout_(choose_bands(num_permutations, threshold)),
      threshold_(threshold),
      num_permutations_(num_permutations),
      seed_(seed),
      buckets_(layout_.bands) {}

void LshIndex::check(const MinHashSignature& sig) const {
  if (sig.size() != num_permutations_)
    throw UsageError("signature has " + std::to_string(sig.size()) +
                     " permutations, index expects " +
                     std::to_string(num_permutations_));
  if (sig.seed != seed_) throw UsageError("signature seed does not match index");
}

std::vector<std::uint64_t> LshIndex::band_hashes(
    const MinHashSignature& sig) const {
  std::vector<std::uint64_t> out(layout_.bands);
  for (std::size_t b = 0; b < layout_.bands; ++b) {
    std::uint64_t h = fmix64(b + 1);
    for (std::size_t r = 0; r < layout_.rows; ++r)
      h = hash_combine(h, sig.values[b * layout_.rows + r]);
    out[b] = h;
  }
  return out;
}

bool LshIndex::insert(Key key, const MinHashSignature& sig) {
  if (frozen_) throw UsageError("insert into a frozen LSH index");
  check(sig);
  bool replaced = false;
  if (auto it = band_keys_.find(key); it != band_keys_.end()) {
    replaced = true;
    for (std::size_t b = 0; b < layout_.bands; ++b) {
      auto bucket = buckets_[b].find(it->second[b]);
      if (bucket == buckets_[b].end()) continue;
      auto& keys = bucket->second;
      keys.erase(std::remove(keys.begin(), keys.end(), key), keys.end());
      if (keys.empty()) buckets_[b].erase(bucket);
    }
  }
  auto hashes = band_hashes(sig);
  for (std::size_t b = 0; b < layout_.bands; ++b)
    buckets_[b][hashes[b]].push_back(key);
  band_keys_[key] = std::move(hashes);
  return replaced;
}

std::vector<LshIndex::Key> LshIndex::query(const MinHashSignature& sig) const {
  check(sig);
  std::vector<Key> out;
  const auto hashes = band_hashes(sig);
  for (std::size_t b = 0; b < layout_.bands; ++b) {
    auto it = buckets_[b].find(hashes[b]);
    if (it == buckets_[b].end()) continue;
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

std::vector<std::vector<std::size_t>> lsh_blocks(
    std::span<const MinHashSignature> signatures, double threshold) {
  std::vector<std::vector<std::size_t>> blocks;
  if (signatures.empty()) return blocks;
  LshIndex index(signatures.front().size(), threshold, signatures.front().seed);
  for (std::size_t i = 0; i < signatures.size(); ++i)
    index.insert(i, signatures[i]);
  DisjointSet ds(signatures.size());
  index.for_each_bucket([&](const std::vector<std::size_t>& keys) {
    for (std::size_t i = 1; i < keys.size(); ++i) ds.unite(keys[0], keys[i]);
  });
  std::vector<std::size_t> block_of(signatures.size(),
                                    std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    const std::size_t root = ds.find(i);
    if (block_of[root] == std::numeric_limits<std::size_t>::max()) {
      block_of[root] = blocks.size();
      blocks.emplace_back();
    }
    blocks[block_of[root]].push_back(i);
  }
  return blocks;
}

}  // namespace logsieve
