#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "logsieve/config.hpp"
#include "logsieve/token.hpp"
#include "logsieve/tokenizer.hpp"

namespace logsieve {

// Training-time bookkeeping for one pattern. `match_count` and `length_sum`
// count every line merged into the pattern and the preprocessed token length
// of each; `files` holds the indices of training files containing it.
struct PatternStats {
  std::uint64_t frequency = 0;
  std::uint64_t match_count = 0;
  std::uint64_t length_sum = 0;
  std::vector<std::uint32_t> files;

  void merge(const PatternStats& other);
  bool operator==(const PatternStats&) const = default;
};

struct PatternEntry {
  Pattern pattern;
  PatternStats stats;

  bool operator==(const PatternEntry&) const = default;
};

// Patterns in ascending Pattern order, each unique.
struct PatternSet {
  std::vector<PatternEntry> entries;
  std::uint32_t training_files = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::uint64_t total_frequency() const;
  bool operator==(const PatternSet&) const = default;
};

// One PatternCounts per training file, merged with file presence recorded.
PatternSet pattern_set_from_counts(std::span<const PatternCounts> per_file);

// Sorts entries and merges duplicate patterns.
PatternSet canonicalize(std::vector<PatternEntry> entries,
                        std::uint32_t training_files);

// Regroups each LSH block greedily: a pattern joins the first sub-block whose
// first member satisfies the LCS similarity bound with it, otherwise it
// opens a new sub-block. Members are visited in the order given.
std::vector<std::vector<std::size_t>> verify_blocks(
    std::span<const Pattern> patterns,
    const std::vector<std::vector<std::size_t>>& blocks, double alpha);

// One pass of block, verify, align and reduce. Misfit rows come back as
// their own patterns. If `origins` is given, (*origins)[k] lists the input
// indices merged into output k.
PatternSet reduce_once(const PatternSet& ps, const Config& cfg,
                       unsigned workers = 1,
                       std::vector<std::vector<std::size_t>>* origins = nullptr);

struct ParseResult {
  PatternSet patterns;
  // Pattern count before the first pass followed by the count after each.
  std::vector<std::size_t> trace;
  bool converged = false;
  std::uint64_t total_lines = 0;
  std::uint64_t blank_lines = 0;
};

// Iterates reduce_once until the pattern count stops changing or
// cfg.max_iterations passes have run. Pass i hashes with a seed derived
// from cfg.seed and i, so each pass draws fresh LSH buckets.
ParseResult parse(std::span<const PatternCounts> per_file, const Config& cfg,
                  unsigned workers = 1);

// Seed used by pass `iteration` (1-based).
std::uint64_t iteration_seed(std::uint64_t seed, std::size_t iteration);

}  // namespace logsieve
