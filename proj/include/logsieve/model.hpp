#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "logsieve/config.hpp"
#include "logsieve/minhash.hpp"
#include "logsieve/parser.hpp"
#include "logsieve/token.hpp"

namespace logsieve {

inline constexpr int kModelFormatVersion = 1;

struct Provenance {
  std::uint32_t training_files = 0;
  std::uint64_t total_lines = 0;
  bool operator==(const Provenance&) const = default;
};

struct ModelPattern {
  Pattern pattern;
  std::uint64_t frequency = 0;
  std::uint64_t match_count = 0;
  std::uint64_t length_sum = 0;
  std::uint32_t file_count = 0;
  bool operator==(const ModelPattern&) const = default;
};

// Selected training patterns with their LSH index. Pattern ids are positions
// in patterns(): frequency descending, ties in Pattern order. Immutable once
// built and safe to share between threads.
class PatternModel {
 public:
  PatternModel(Config config, Provenance provenance,
               std::vector<ModelPattern> patterns);

  const Config& config() const { return config_; }
  const Provenance& provenance() const { return provenance_; }
  const std::vector<ModelPattern>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }

  MinHashSignature sign(const Pattern& p) const;
  const MinHashSignature& signature(std::size_t id) const { return signatures_[id]; }
  const LshIndex& lsh() const { return lsh_; }

  // Ids whose token multiset overlap with `q` could reach alpha * max length.
  // A superset of every pattern satisfying the LCS bound with `q`, ascending.
  std::vector<std::size_t> overlap_candidates(const Pattern& q, double alpha) const;

  // Same patterns, stats, config and provenance.
  bool operator==(const PatternModel& other) const {
    return config_ == other.config_ && provenance_ == other.provenance_ &&
           patterns_ == other.patterns_;
  }

 private:
  Config config_;
  Provenance provenance_;
  std::vector<ModelPattern> patterns_;
  MinHasher hasher_;
  std::vector<MinHashSignature> signatures_;
  LshIndex lsh_;
  // token -> (pattern id, occurrences in that pattern), ids ascending
  std::unordered_map<Token, std::vector<std::pair<std::uint32_t, std::uint32_t>>,
                     TokenHash>
      postings_;
};

// Frequency-descending prefix reaching coverage_fraction of all lines, plus
// every pattern present in at least file_presence_fraction of the files.
PatternModel select_patterns(const PatternSet& ps, const Config& cfg);

std::string serialize_model(const PatternModel& model);
void save_model(const PatternModel& model, const std::string& path);
PatternModel parse_model(std::string_view content);
PatternModel load_model(const std::string& path);

nlohmann::json tokens_to_json(const Pattern& p);
// Throws InputError (without position) on malformed token arrays.
Pattern tokens_from_json(const nlohmann::json& j);

}  // namespace logsieve
