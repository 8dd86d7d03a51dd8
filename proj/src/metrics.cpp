#include "logsieve/metrics.hpp"

#include "logsieve/errors.hpp"
#include "logsieve/filter.hpp"
#include "logsieve/parallel.hpp"
#include "logsieve/tokenizer.hpp"

namespace logsieve {

double average_tokens_lost(std::uint64_t length_sum, std::uint64_t match_count,
                           std::size_t length) {
  if (match_count == 0) throw UsageError("pattern has no matched lines");
  return static_cast<double>(length_sum) / static_cast<double>(match_count) -
         static_cast<double>(length);
}

double loss_term(std::uint64_t length_sum, std::uint64_t match_count, std::size_t length) {
  if (length == 0) throw UsageError("pattern has zero length");
  const double r = average_tokens_lost(length_sum, match_count, length) /
                   static_cast<double>(length);
  return r * r;
}

double quality_loss(std::span<const ModelPattern> patterns) {
  if (patterns.empty()) throw UsageError("quality loss of an empty pattern set");
  double sum = 0.0;
  for (const auto& p : patterns) sum += loss_term(p.length_sum, p.match_count, p.pattern.length());
  return sum / static_cast<double>(patterns.size());
}

double quality_loss(const PatternSet& ps) {
  if (ps.empty()) throw UsageError("quality loss of an empty pattern set");
  double sum = 0.0;
  for (const auto& e : ps.entries)
    sum += loss_term(e.stats.length_sum, e.stats.match_count, e.pattern.length());
  return sum / static_cast<double>(ps.size());
}

namespace {

void finish(EvalReport& r) {
  double sum = 0.0;
  for (const auto& t : r.terms) sum += t.term;
  r.matched_patterns = r.terms.size();
  r.quality_loss = r.terms.empty() ? 0.0 : sum / static_cast<double>(r.terms.size());
}

}  // namespace

EvalReport evaluate(const PatternModel& model, std::span<const std::string> lines,
                    const Config& cfg, unsigned workers) {
  cfg.validate();
  const PatternCounts counts = preprocess_lines(lines);
  std::vector<std::pair<const Pattern*, std::uint64_t>> unique;
  unique.reserve(counts.entries.size());
  for (const auto& [p, n] : counts.entries) unique.emplace_back(&p, n);

  std::vector<std::optional<std::size_t>> matched(unique.size());
  parallel_for(unique.size(), workers, [&](std::size_t i) {
    matched[i] = match_pattern(model, *unique[i].first, cfg.alpha);
  });

  std::vector<std::uint64_t> match_count(model.size(), 0), length_sum(model.size(), 0);
  EvalReport r;
  r.pattern_count = model.size();
  r.lines = lines.size();
  for (std::size_t i = 0; i < unique.size(); ++i) {
    const auto [p, n] = unique[i];
    if (!matched[i]) {
      r.unmatched_lines += n;
      continue;
    }
    r.matched_lines += n;
    match_count[*matched[i]] += n;
    length_sum[*matched[i]] += n * p->length();
  }
  for (std::size_t id = 0; id < model.size(); ++id) {
    if (match_count[id] == 0) continue;
    r.terms.push_back({id, match_count[id], length_sum[id],
                       loss_term(length_sum[id], match_count[id],
                                 model.patterns()[id].pattern.length())});
  }
  finish(r);
  return r;
}

EvalReport evaluate_stored(const PatternModel& model) {
  EvalReport r;
  r.pattern_count = model.size();
  r.lines = model.provenance().total_lines;
  for (std::size_t id = 0; id < model.size(); ++id) {
    const auto& mp = model.patterns()[id];
    r.matched_lines += mp.match_count;
    if (mp.match_count == 0) continue;
    r.terms.push_back({id, mp.match_count, mp.length_sum,
                       loss_term(mp.length_sum, mp.match_count, mp.pattern.length())});
  }
  // Lines of patterns dropped at selection.
  r.unmatched_lines = r.lines > r.matched_lines ? r.lines - r.matched_lines : 0;
  finish(r);
  return r;
}

nlohmann::json to_json(const EvalReport& report, bool include_terms) {
  nlohmann::json j{{"pattern_count", report.pattern_count},
                   {"matched_patterns", report.matched_patterns},
                   {"lines", report.lines},
                   {"matched_lines", report.matched_lines},
                   {"unmatched_lines", report.unmatched_lines},
                   {"quality_loss", report.quality_loss}};
  if (include_terms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : report.terms)
      arr.push_back({{"id", t.id},
                     {"match_count", t.match_count},
                     {"length_sum", t.length_sum},
                     {"term", t.term}});
    j["terms"] = std::move(arr);
  }
  return j;
}

}  // namespace logsieve
