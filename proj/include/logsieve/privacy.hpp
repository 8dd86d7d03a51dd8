#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logsieve/minhash.hpp"
#include "logsieve/token.hpp"

namespace logsieve {

inline constexpr int kEncodingFormatVersion = 1;

struct BloomConfig {
  std::size_t m = 1024;  // bitmap width, power of two, >= 64
  std::size_t k = 2;     // bit positions per shingle
  std::size_t shingle_n = 2;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const BloomConfig&) const = default;
};

// One-way bitmap of a pattern's token shingles plus an occurrence count.
class BloomEncoding {
 public:
  BloomEncoding() = default;
  BloomEncoding(const BloomConfig& config, std::uint64_t frequency);

  const BloomConfig& config() const { return config_; }
  std::uint64_t frequency() const { return frequency_; }
  void set_frequency(std::uint64_t f) { frequency_ = f; }
  std::size_t set_bits() const { return set_bits_; }
  double fill_ratio() const {
    return static_cast<double>(set_bits_) / static_cast<double>(config_.m);
  }

  void set(std::size_t bit);
  bool test(std::size_t bit) const;
  std::vector<std::uint64_t> positions() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  // m/8 bytes; bit i lives in byte i/8 under mask 0x80 >> (i % 8).
  std::vector<std::uint8_t> to_bytes() const;
  static BloomEncoding from_bytes(const BloomConfig& config,
                                  std::span<const std::uint8_t> bytes,
                                  std::uint64_t frequency);

  // Bitmap comparison only; frequency is ignored.
  bool same_bitmap(const BloomEncoding& other) const {
    return config_ == other.config_ && words_ == other.words_;
  }
  bool operator==(const BloomEncoding&) const = default;

 private:
  BloomConfig config_;
  std::vector<std::uint64_t> words_;
  std::uint64_t frequency_ = 1;
  std::size_t set_bits_ = 0;
};

// Sets k seeded positions per token shingle. Throws UsageError on an empty
// pattern.
BloomEncoding encode_pattern(const Pattern& p, const BloomConfig& config,
                             std::uint64_t frequency = 1);

// popcount(a & b) / popcount(a | b); 1.0 for two empty bitmaps. Throws
// UsageError if the configs differ.
double encoding_jaccard(const BloomEncoding& a, const BloomEncoding& b);

struct StoreOptions {
  // Bitmap Jaccard a candidate needs to count as the same pattern.
  double match_threshold = 0.9;
  // LSH banding target for candidate retrieval; below match_threshold so
  // the banding rarely misses a pair that would verify.
  double candidate_threshold = 0.75;
  std::size_t num_permutations = 100;
  bool operator==(const StoreOptions&) const = default;
};

// Frozen set of aggregated encodings with an LSH index over their set-bit
// positions. Holds bitmaps and counts only.
class EncodingStore {
 public:
  EncodingStore(BloomConfig config, StoreOptions options,
                std::vector<BloomEncoding> encodings);

  const BloomConfig& config() const { return config_; }
  const StoreOptions& options() const { return options_; }
  const std::vector<BloomEncoding>& encodings() const { return encodings_; }
  std::size_t size() const { return encodings_.size(); }
  bool empty() const { return encodings_.empty(); }

  MinHashSignature sign(const BloomEncoding& e) const;
  // Candidate ids sharing an LSH bucket with `e`, ascending.
  std::vector<std::size_t> candidates(const BloomEncoding& e) const;
  // Best-matching stored id at or above match_threshold.
  std::optional<std::size_t> find(const BloomEncoding& e) const;

 private:
  BloomConfig config_;
  StoreOptions options_;
  std::vector<BloomEncoding> encodings_;
  MinHasher hasher_;
  LshIndex lsh_;
};

struct Submission {
  BloomEncoding encoding;
  std::string client_id;
};

// Server-side merge: LSH blocking over bitmaps, verification against each
// sub-block's highest-frequency member at match_threshold, frequency sums
// per sub-block and coverage selection over the results. Throws UsageError
// naming every client whose BloomConfig differs from `config`.
EncodingStore aggregate(std::span<const Submission> submissions,
                        const BloomConfig& config, double coverage_fraction,
                        const StoreOptions& options = {});

std::optional<std::size_t> find_encoded(const EncodingStore& store,
                                        const Pattern& p);
bool match_encoded(const EncodingStore& store, const Pattern& p);

// Exchange file: header, one record per encoding, checksum record. A store
// is written with its options in the header; client files omit them.
struct EncodingFile {
  BloomConfig config;
  std::optional<StoreOptions> store_options;
  std::vector<BloomEncoding> encodings;
};

std::string serialize_encodings(const EncodingFile& file);
EncodingFile parse_encodings(std::string_view content);
void save_encodings(const EncodingFile& file, const std::string& path);
EncodingFile load_encodings(const std::string& path);

EncodingFile to_file(const EncodingStore& store);
EncodingStore store_from_file(const EncodingFile& file);

}  // namespace logsieve
