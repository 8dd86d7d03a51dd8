#include "logsieve/parser.hpp"

#include <algorithm>
#include <map>

#include "logsieve/align.hpp"
#include "logsieve/errors.hpp"
#include "logsieve/hash.hpp"
#include "logsieve/minhash.hpp"
#include "logsieve/parallel.hpp"

namespace logsieve {

void PatternStats::merge(const PatternStats& other) {
  frequency += other.frequency;
  match_count += other.match_count;
  length_sum += other.length_sum;
  std::vector<std::uint32_t> joined;
  joined.reserve(files.size() + other.files.size());
  std::set_union(files.begin(), files.end(), other.files.begin(),
                 other.files.end(), std::back_inserter(joined));
  files = std::move(joined);
}

std::uint64_t PatternSet::total_frequency() const {
  std::uint64_t sum = 0;
  for (const auto& e : entries) sum += e.stats.frequency;
  return sum;
}

PatternSet canonicalize(std::vector<PatternEntry> entries,
                        std::uint32_t training_files) {
  std::sort(entries.begin(), entries.end(),
            [](const PatternEntry& a, const PatternEntry& b) {
              return a.pattern < b.pattern;
            });
  PatternSet out;
  out.training_files = training_files;
  for (auto& e : entries) {
    if (!out.entries.empty() && out.entries.back().pattern == e.pattern) {
      out.entries.back().stats.merge(e.stats);
    } else {
      out.entries.push_back(std::move(e));
    }
  }
  return out;
}

PatternSet pattern_set_from_counts(std::span<const PatternCounts> per_file) {
  std::vector<PatternEntry> entries;
  for (std::size_t f = 0; f < per_file.size(); ++f) {
    for (const auto& [pattern, count] : per_file[f].entries) {
      PatternEntry e{pattern, {}};
      e.stats.frequency = count;
      e.stats.match_count = count;
      e.stats.length_sum = count * pattern.length();
      e.stats.files = {static_cast<std::uint32_t>(f)};
      entries.push_back(std::move(e));
    }
  }
  return canonicalize(std::move(entries),
                      static_cast<std::uint32_t>(per_file.size()));
}

std::vector<std::vector<std::size_t>> verify_blocks(
    std::span<const Pattern> patterns,
    const std::vector<std::vector<std::size_t>>& blocks, double alpha) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& block : blocks) {
    const std::size_t first_sub = out.size();
    for (std::size_t idx : block) {
      bool placed = false;
      for (std::size_t s = first_sub; s < out.size(); ++s) {
        if (satisfies_similarity(patterns[out[s].front()], patterns[idx], alpha)) {
          out[s].push_back(idx);
          placed = true;
          break;
        }
      }
      if (!placed) out.push_back({idx});
    }
  }
  return out;
}

namespace {

struct SubBlockResult {
  std::vector<PatternEntry> entries;
  std::vector<std::vector<std::size_t>> origins;
};

SubBlockResult reduce_sub_block(const PatternSet& ps,
                                const std::vector<std::size_t>& members,
                                double beta) {
  SubBlockResult result;
  auto emit_unchanged = [&](std::size_t idx) {
    result.entries.push_back(ps.entries[idx]);
    result.origins.push_back({idx});
  };
  if (members.size() == 1) {
    emit_unchanged(members.front());
    return result;
  }
  std::vector<Pattern> rows;
  rows.reserve(members.size());
  for (std::size_t idx : members) rows.push_back(ps.entries[idx].pattern);
  const AlignmentMatrix matrix = align_block(rows);
  const ReductionOutcome outcome = reduce_matrix(matrix, beta);
  if (outcome.misfits.size() == members.size()) {
    for (std::size_t idx : members) emit_unchanged(idx);
    return result;
  }
  PatternEntry merged{outcome.reduced, {}};
  std::vector<std::size_t> merged_from;
  std::size_t next_misfit = 0;
  for (std::size_t r = 0; r < members.size(); ++r) {
    if (next_misfit < outcome.misfits.size() && outcome.misfits[next_misfit] == r) {
      ++next_misfit;
      emit_unchanged(members[r]);
      continue;
    }
    merged.stats.merge(ps.entries[members[r]].stats);
    merged_from.push_back(members[r]);
  }
  result.entries.push_back(std::move(merged));
  result.origins.push_back(std::move(merged_from));
  return result;
}

}  // namespace

PatternSet reduce_once(const PatternSet& ps, const Config& cfg, unsigned workers,
                       std::vector<std::vector<std::size_t>>* origins) {
  if (ps.empty()) throw UsageError("reduce_once needs a nonempty pattern set");
  const std::size_t n = ps.size();
  std::vector<Pattern> patterns;
  patterns.reserve(n);
  for (const auto& e : ps.entries) patterns.push_back(e.pattern);

  const MinHasher hasher(cfg.num_permutations, cfg.seed);
  std::vector<MinHashSignature> sigs(n);
  parallel_for(n, workers, [&](std::size_t i) {
    sigs[i] = hasher.sign(shingle(patterns[i], cfg.shingle_n));
  });
  const auto blocks = lsh_blocks(sigs, cfg.jaccard_threshold);
  const auto sub_blocks = verify_blocks(patterns, blocks, cfg.alpha);

  std::vector<SubBlockResult> results(sub_blocks.size());
  parallel_for(sub_blocks.size(), workers, [&](std::size_t s) {
    results[s] = reduce_sub_block(ps, sub_blocks[s], cfg.beta);
  });

  // Merge outputs; a reduced pattern may coincide with another output.
  std::map<Pattern, std::size_t> slot;
  std::vector<PatternEntry> merged;
  std::vector<std::vector<std::size_t>> merged_origins;
  for (auto& r : results) {
    for (std::size_t k = 0; k < r.entries.size(); ++k) {
      auto [it, inserted] = slot.emplace(r.entries[k].pattern, merged.size());
      if (inserted) {
        merged.push_back(std::move(r.entries[k]));
        merged_origins.push_back(std::move(r.origins[k]));
      } else {
        merged[it->second].stats.merge(r.entries[k].stats);
        auto& o = merged_origins[it->second];
        o.insert(o.end(), r.origins[k].begin(), r.origins[k].end());
      }
    }
  }

  PatternSet out;
  out.training_files = ps.training_files;
  out.entries.reserve(merged.size());
  if (origins) origins->clear();
  for (const auto& [pattern, idx] : slot) {
    out.entries.push_back(std::move(merged[idx]));
    if (origins) {
      auto& o = merged_origins[idx];
      std::sort(o.begin(), o.end());
      origins->push_back(std::move(o));
    }
  }
  return out;
}

std::uint64_t iteration_seed(std::uint64_t seed, std::size_t iteration) {
  return iteration <= 1 ? seed : derive_seed(seed, iteration);
}

ParseResult parse(std::span<const PatternCounts> per_file, const Config& cfg,
                  unsigned workers) {
  cfg.validate();
  ParseResult result;
  for (const auto& counts : per_file) {
    result.total_lines += counts.source_lines;
    result.blank_lines += counts.blank_lines;
  }
  result.patterns = pattern_set_from_counts(per_file);
  result.trace.push_back(result.patterns.size());
  if (result.patterns.empty()) {
    result.converged = true;
    return result;
  }
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    Config pass = cfg;
    pass.seed = iteration_seed(cfg.seed, it);
    PatternSet next = reduce_once(result.patterns, pass, workers);
    const bool stable = next.size() == result.patterns.size();
    result.patterns = std::move(next);
    result.trace.push_back(result.patterns.size());
    if (stable) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace logsieve
