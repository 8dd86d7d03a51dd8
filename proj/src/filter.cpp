#include "logsieve/filter.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "logsieve/align.hpp"
#include "logsieve/errors.hpp"
#include "logsieve/parallel.hpp"

namespace logsieve {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kMatchedPattern: return "matched";
    case Verdict::kMatchedEncoding: return "matched_encoding";
    case Verdict::kFrequencySuppressed: return "frequency_suppressed";
    case Verdict::kAnomaly: return "anomaly";
    case Verdict::kBlank: return "blank";
  }
  return "unknown";
}

std::optional<std::size_t> match_pattern(const PatternModel& model, const Pattern& q,
                                         double alpha, const MatchOptions& opts) {
  if (q.empty() || model.size() == 0) return std::nullopt;
  const MinHashSignature sig = model.sign(q);
  const auto keys = model.lsh().query(sig);

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(keys.size());
  for (std::size_t id : keys) ranked.emplace_back(estimate_jaccard(sig, model.signature(id)), id);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [est, id] : ranked)
    if (satisfies_similarity(model.patterns()[id].pattern, q, alpha)) return id;

  if (!opts.exhaustive_fallback) return std::nullopt;
  for (std::size_t id : model.overlap_candidates(q, alpha)) {
    if (std::binary_search(keys.begin(), keys.end(), id)) continue;
    if (satisfies_similarity(model.patterns()[id].pattern, q, alpha)) return id;
  }
  return std::nullopt;
}

std::optional<std::size_t> match_line(const PatternModel& model, std::string_view line,
                                      double alpha, Tokenizer& tokenizer,
                                      const MatchOptions& opts) {
  const auto p = tokenizer.tokenize(line);
  if (!p) return std::nullopt;
  return match_pattern(model, *p, alpha, opts);
}

std::optional<std::size_t> match_line(const PatternModel& model, std::string_view line,
                                      double alpha, const MatchOptions& opts) {
  const auto p = tokenize_line(line);
  if (!p) return std::nullopt;
  return match_pattern(model, *p, alpha, opts);
}

void FrequencyTracker::merge(const FrequencyTracker& other) {
  for (const auto& [p, n] : other.counts_) counts_[p] += n;
}

std::uint64_t FrequencyTracker::count(const Pattern& p) const {
  auto it = counts_.find(p);
  return it == counts_.end() ? 0 : it->second;
}

FilterReport filter_lines(const PatternModel& model, const EncodingStore* store,
                          std::span<const std::string> lines, const Config& cfg,
                          unsigned workers, const MatchOptions& opts) {
  cfg.validate();
  workers = std::max(1u, workers);
  const std::size_t n = lines.size();

  // Tokenize in shards, one LRU cache per shard.
  std::vector<std::optional<Pattern>> tokenized(n);
  const std::size_t shards = std::min<std::size_t>(std::max<std::size_t>(n, 1), workers * 4);
  const std::size_t shard_len = (n + shards - 1) / std::max<std::size_t>(shards, 1);
  parallel_for(shards, workers, [&](std::size_t s) {
    Tokenizer tok;
    const std::size_t lo = s * shard_len, hi = std::min(n, lo + shard_len);
    for (std::size_t i = lo; i < hi; ++i) tokenized[i] = tok.tokenize(lines[i]);
  });

  // Each unique pattern is matched once.
  std::unordered_map<Pattern, std::size_t, PatternHash> unique_index;
  std::vector<const Pattern*> unique;
  std::vector<std::size_t> line_unique(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    if (!tokenized[i]) continue;
    auto [it, fresh] = unique_index.try_emplace(*tokenized[i], unique.size());
    if (fresh) unique.push_back(&it->first);
    line_unique[i] = it->second;
  }

  struct UniqueVerdict {
    Verdict verdict = Verdict::kAnomaly;
    std::size_t id = 0;
  };
  std::vector<UniqueVerdict> uv(unique.size());
  parallel_for(unique.size(), workers, [&](std::size_t u) {
    const Pattern& p = *unique[u];
    if (auto id = match_pattern(model, p, cfg.alpha, opts)) {
      uv[u] = {Verdict::kMatchedPattern, *id};
    } else if (store) {
      if (auto eid = find_encoded(*store, p)) uv[u] = {Verdict::kMatchedEncoding, *eid};
    }
  });

  FrequencyTracker tracker(cfg.gamma);
  for (std::size_t i = 0; i < n; ++i)
    if (line_unique[i] != SIZE_MAX && uv[line_unique[i]].verdict == Verdict::kAnomaly)
      tracker.add(*tokenized[i]);

  FilterReport report;
  report.results.resize(n);
  report.totals.lines_in = n;
  for (std::size_t i = 0; i < n; ++i) {
    MatchResult& r = report.results[i];
    r.line_number = i + 1;
    if (line_unique[i] == SIZE_MAX) {
      r.verdict = Verdict::kBlank;
      ++report.totals.blank;
      continue;
    }
    const UniqueVerdict& v = uv[line_unique[i]];
    r.verdict = v.verdict;
    r.id = v.id;
    switch (v.verdict) {
      case Verdict::kMatchedPattern: ++report.totals.matched; break;
      case Verdict::kMatchedEncoding: ++report.totals.matched_encoding; break;
      default:
        if (tracker.suppressed(*tokenized[i])) {
          r.verdict = Verdict::kFrequencySuppressed;
          ++report.totals.frequency_suppressed;
        } else {
          ++report.totals.anomalous;
          report.anomalies.push_back({i + 1, lines[i]});
        }
    }
  }
  if (report.totals.sum() != report.totals.lines_in)
    throw InvariantError("filter totals do not add up to the input line count");
  return report;
}

FilterReport filter_stream(const PatternModel& model, const EncodingStore* store,
                           std::istream& in, const Config& cfg, unsigned workers,
                           const MatchOptions& opts) {
  const auto lines = read_lines(in);
  return filter_lines(model, store, lines, cfg, workers, opts);
}

nlohmann::json summary_json(const FilterTotals& t) {
  return nlohmann::json{{"lines_in", t.lines_in},
                        {"matched", t.matched},
                        {"matched_encoding", t.matched_encoding},
                        {"frequency_suppressed", t.frequency_suppressed},
                        {"anomalous", t.anomalous},
                        {"blank", t.blank}};
}

void write_report(const FilterReport& report, std::ostream& out) {
  for (const auto& a : report.anomalies) out << "LINE " << a.line_number << ": " << a.line << '\n';
  out << summary_json(report.totals).dump() << '\n';
}

}  // namespace logsieve
