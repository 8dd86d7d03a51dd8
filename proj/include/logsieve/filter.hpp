#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "logsieve/config.hpp"
#include "logsieve/model.hpp"
#include "logsieve/privacy.hpp"
#include "logsieve/token.hpp"
#include "logsieve/tokenizer.hpp"

namespace logsieve {

// kBlank marks lines with no tokens; they are neither matched nor anomalous.
enum class Verdict : std::uint8_t {
  kMatchedPattern,
  kMatchedEncoding,
  kFrequencySuppressed,
  kAnomaly,
  kBlank,
};

std::string_view verdict_name(Verdict v);

struct MatchResult {
  Verdict verdict = Verdict::kAnomaly;
  std::size_t id = 0;  // pattern or encoding id for the two matched verdicts
  std::uint64_t line_number = 0;  // 1-based
  bool operator==(const MatchResult&) const = default;
};

struct MatchOptions {
  // After the LSH candidates fail, scan every model pattern whose token
  // overlap could pass. Makes the matcher exact at the cost of speed.
  bool exhaustive_fallback = true;
};

// First LSH candidate (estimated Jaccard descending, ties by id) passing the
// LCS bound, then the fallback scan in id order.
std::optional<std::size_t> match_pattern(const PatternModel& model, const Pattern& q,
                                         double alpha, const MatchOptions& opts = {});
std::optional<std::size_t> match_line(const PatternModel& model, std::string_view line,
                                      double alpha, Tokenizer& tokenizer,
                                      const MatchOptions& opts = {});
std::optional<std::size_t> match_line(const PatternModel& model, std::string_view line,
                                      double alpha, const MatchOptions& opts = {});

// Occurrences of each unmatched preprocessed pattern.
class FrequencyTracker {
 public:
  explicit FrequencyTracker(std::uint64_t gamma) : gamma_(gamma) {}

  void add(const Pattern& p, std::uint64_t n = 1) { counts_[p] += n; }
  void merge(const FrequencyTracker& other);
  std::uint64_t count(const Pattern& p) const;
  // f - gamma > 0
  bool suppressed(const Pattern& p) const { return count(p) > gamma_; }
  std::uint64_t gamma() const { return gamma_; }
  std::size_t size() const { return counts_.size(); }

 private:
  std::uint64_t gamma_;
  std::unordered_map<Pattern, std::uint64_t, PatternHash> counts_;
};

struct FilterTotals {
  std::uint64_t lines_in = 0;
  std::uint64_t matched = 0;
  std::uint64_t matched_encoding = 0;
  std::uint64_t frequency_suppressed = 0;
  std::uint64_t anomalous = 0;
  std::uint64_t blank = 0;

  std::uint64_t sum() const {
    return matched + matched_encoding + frequency_suppressed + anomalous + blank;
  }
  bool operator==(const FilterTotals&) const = default;
};

struct Anomaly {
  std::uint64_t line_number = 0;
  std::string line;
  bool operator==(const Anomaly&) const = default;
};

struct FilterReport {
  std::vector<MatchResult> results;  // one per input line, in order
  std::vector<Anomaly> anomalies;    // input order
  FilterTotals totals;
  bool operator==(const FilterReport&) const = default;
};

// Two passes: match every line against the model (then the store, if any)
// and count unmatched patterns; then mark unmatched lines whose pattern
// occurs more than cfg.gamma times as suppressed and the rest as anomalies.
FilterReport filter_lines(const PatternModel& model, const EncodingStore* store,
                          std::span<const std::string> lines, const Config& cfg,
                          unsigned workers = 1, const MatchOptions& opts = {});

// Reads the whole stream before filtering; a read failure throws InputError
// and no report is produced.
FilterReport filter_stream(const PatternModel& model, const EncodingStore* store,
                           std::istream& in, const Config& cfg, unsigned workers = 1,
                           const MatchOptions& opts = {});

nlohmann::json summary_json(const FilterTotals& totals);

// "LINE <n>: <raw>" per anomaly followed by the JSON summary on its own line.
void write_report(const FilterReport& report, std::ostream& out);

}  // namespace logsieve
