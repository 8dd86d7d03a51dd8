#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "logsieve/config.hpp"
#include "logsieve/model.hpp"
#include "logsieve/parser.hpp"

namespace logsieve {

// length_sum / match_count - length. Negative when matched lines were on
// average shorter than the pattern. Throws UsageError if match_count is 0.
double average_tokens_lost(std::uint64_t length_sum, std::uint64_t match_count,
                           std::size_t length);

// (average_tokens_lost / length)^2
double loss_term(std::uint64_t length_sum, std::uint64_t match_count, std::size_t length);

// Mean of loss_term over the patterns. Throws UsageError on an empty set or
// a pattern without matches.
double quality_loss(std::span<const ModelPattern> patterns);
double quality_loss(const PatternSet& ps);

struct PatternLoss {
  std::size_t id = 0;
  std::uint64_t match_count = 0;
  std::uint64_t length_sum = 0;
  double term = 0.0;
};

struct EvalReport {
  std::size_t pattern_count = 0;   // model size
  std::size_t matched_patterns = 0;  // patterns with at least one matched line
  std::uint64_t lines = 0;
  std::uint64_t matched_lines = 0;
  std::uint64_t unmatched_lines = 0;
  double quality_loss = 0.0;       // over matched_patterns; 0 if none
  std::vector<PatternLoss> terms;  // matched patterns, ascending id
};

// Re-matches `lines` against the model and recomputes each pattern's match
// stats from the preprocessed lengths of the lines it matched.
EvalReport evaluate(const PatternModel& model, std::span<const std::string> lines,
                    const Config& cfg, unsigned workers = 1);

// Loss from the stats stored in the model file.
EvalReport evaluate_stored(const PatternModel& model);

nlohmann::json to_json(const EvalReport& report, bool include_terms = false);

}  // namespace logsieve
