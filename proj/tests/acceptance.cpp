// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "logsieve/align.hpp"
#include "logsieve/datagen.hpp"
#include "logsieve/filter.hpp"
#include "logsieve/metrics.hpp"
#include "logsieve/minhash.hpp"
#include "logsieve/model.hpp"
#include "logsieve/parser.hpp"
#include "logsieve/privacy.hpp"
#include "logsieve/tokenizer.hpp"

using namespace logsieve;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 100 templates x 100k lines, shared by criteria 1-3.
struct Corpus {
  Dataset ds;
  PatternCounts counts;
  ParseResult parsed;
  double preprocess_s = 0, parse_s = 0;
};

const Corpus& corpus(std::uint64_t seed) {
  static std::map<std::uint64_t, Corpus> cache;
  auto it = cache.find(seed);
  if (it != cache.end()) return it->second;
  Corpus c;
  c.ds = generate_corpus(100, 100000, seed);
  auto t = Clock::now();
  std::vector<PatternCounts> per_file{preprocess_lines(c.ds.train[0].lines)};
  c.preprocess_s = seconds_since(t);
  c.counts = per_file[0];
  Config cfg;
  cfg.seed = seed;
  t = Clock::now();
  c.parsed = parse(per_file, cfg, workers());
  c.parse_s = seconds_since(t);
  return cache.emplace(seed, std::move(c)).first->second;
}

Outcome template_recovery() {
  const Corpus& c = corpus(1);
  std::set<Pattern> got;
  for (const auto& e : c.parsed.patterns.entries) got.insert(e.pattern);
  std::size_t recovered = 0;
  for (const auto& t : c.ds.templates) recovered += got.count(t.expected);
  const double loss = quality_loss(c.parsed.patterns);
  const double secs = c.preprocess_s + c.parse_s;
  return {recovered >= 95 && loss <= 0.01,
          fmt("recovered %zu/100, quality_loss %.5f, preprocess+parse %.2fs on %u workers",
              recovered, loss, secs, workers())};
}

Outcome preprocessing_compression() {
  const Corpus& c = corpus(1);
  const double ratio =
      static_cast<double>(c.counts.entries.size()) / static_cast<double>(c.counts.source_lines);
  return {ratio <= 0.01, fmt("%zu unique patterns over %llu lines (%.4f%%)", c.counts.entries.size(),
                             static_cast<unsigned long long>(c.counts.source_lines), 100 * ratio)};
}

Outcome iterative_reduction() {
  bool ok = true;
  std::size_t max_passes = 0;
  std::string failures;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto& r = corpus(seed).parsed;
    const bool monotone = std::is_sorted(r.trace.rbegin(), r.trace.rend());
    max_passes = std::max(max_passes, r.trace.size() - 1);
    if (!monotone || !r.converged) {
      ok = false;
      failures += fmt(" seed %llu", static_cast<unsigned long long>(seed));
    }
  }
  return {ok, fmt("10 seeds, at most %zu passes%s%s", max_passes, failures.empty() ? "" : "; failing:",
                  failures.c_str())};
}

Outcome minhash_fidelity() {
  std::mt19937_64 rng(2024);
  double total = 0;
  for (int i = 0; i < 1000; ++i) {
    // Two sets drawn from a shared universe give Jaccard values spread over [0, 1].
    const std::size_t universe = 20 + rng() % 200;
    const double pa = 0.1 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
    const double pb = 0.1 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
    ShingleSet a, b;
    for (std::size_t x = 0; x < universe; ++x) {
      const std::string e = "s" + std::to_string(x);
      if (static_cast<double>(rng() % 1000) / 1000.0 < pa) a.shingles.push_back(e);
      if (static_cast<double>(rng() % 1000) / 1000.0 < pb) b.shingles.push_back(e);
    }
    if (a.empty()) a.shingles.push_back("only-a");
    if (b.empty()) b.shingles.push_back("only-b");
    std::sort(a.shingles.begin(), a.shingles.end());
    std::sort(b.shingles.begin(), b.shingles.end());
    MinHasher h(100, rng());
    total += std::abs(estimate_jaccard(h.sign(a), h.sign(b)) - exact_jaccard(a, b));
  }
  return {total / 1000 <= 0.06, fmt("mean |estimate - exact| = %.4f over 1000 pairs", total / 1000)};
}

// Sequences whose concatenation is a restricted growth string over at most
// four symbols. Scores and LCS depend only on which positions hold equal
// symbols, so this covers every pair up to relabelling.
void for_each_pair(std::size_t max_len,
                   const std::function<void(const std::vector<int>&, const std::vector<int>&)>& fn) {
  for (std::size_t la = 0; la <= max_len; ++la)
    for (std::size_t lb = 0; lb <= max_len; ++lb) {
      const std::size_t n = la + lb;
      std::vector<int> s(n, 0);
      std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
        if (i == n) {
          fn(std::vector<int>(s.begin(), s.begin() + la), std::vector<int>(s.begin() + la, s.end()));
          return;
        }
        for (int v = 0; v <= std::min(used, 3); ++v) {
          s[i] = v;
          rec(i + 1, std::max(used, v + 1));
        }
      };
      rec(0, 0);
    }
}

// Best score over all monotone matchings of positions; unmatched positions
// are gaps. Symbols are small ints.
int brute_alignment_score(const std::vector<int>& a, const std::vector<int>& b) {
  static const auto by_popcount = [] {
    std::vector<std::vector<std::vector<unsigned>>> t(7, std::vector<std::vector<unsigned>>(7));
    for (unsigned len = 0; len <= 6; ++len)
      for (unsigned m = 0; m < (1u << len); ++m) t[len][std::popcount(m)].push_back(m);
    return t;
  }();
  const std::size_t la = a.size(), lb = b.size();
  int best = -1000;
  for (std::size_t k = 0; k <= std::min(la, lb); ++k)
    for (unsigned ma : by_popcount[la][k])
      for (unsigned mb : by_popcount[lb][k]) {
        int score = -static_cast<int>(la + lb) + 2 * static_cast<int>(k);
        unsigned ra = ma, rb = mb;
        while (ra) {
          const int i = std::countr_zero(ra), j = std::countr_zero(rb);
          score += a[i] == b[j] ? kMatchScore : kMismatchScore;
          ra &= ra - 1;
          rb &= rb - 1;
        }
        best = std::max(best, score);
      }
  return best;
}

bool is_subsequence(const TokenSeq& sub, const TokenSeq& of) {
  std::size_t j = 0;
  for (const auto& t : of)
    if (j < sub.size() && sub[j] == t) ++j;
  return j == sub.size();
}

std::size_t brute_lcs(const TokenSeq& a, const TokenSeq& b) {
  std::size_t best = 0;
  for (unsigned m = 0; m < (1u << a.size()); ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) <= best) continue;
    TokenSeq sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (m >> i & 1) sub.push_back(a[i]);
    if (is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

TokenSeq strip_gaps(const TokenSeq& s) {
  TokenSeq out;
  for (const auto& t : s)
    if (!t.is_gap()) out.push_back(t);
  return out;
}

Outcome alignment_optimality() {
  std::size_t pairs = 0, score_bad = 0, lcs_bad = 0, shape_bad = 0;
  static const Token symbols[4] = {Token::constant("a"), Token::constant("b"), Token::constant("c"),
                                   Token::constant("d")};
  for_each_pair(6, [&](const std::vector<int>& sa, const std::vector<int>& sb) {
    ++pairs;
    TokenSeq a, b;
    for (int x : sa) a.push_back(symbols[x]);
    for (int x : sb) b.push_back(symbols[x]);
    if (lcs_length(a, b) != brute_lcs(a, b)) ++lcs_bad;
    if (a.empty() || b.empty()) return;
    const auto r = align_pair(a, b);
    if (r.score != brute_alignment_score(sa, sb)) ++score_bad;
    if (r.first.size() != r.second.size() || strip_gaps(r.first) != a || strip_gaps(r.second) != b ||
        alignment_score(r.first, r.second) != r.score)
      ++shape_bad;
  });
  return {score_bad == 0 && lcs_bad == 0 && shape_bad == 0,
          fmt("%zu pairs up to relabelling: %zu score, %zu LCS, %zu shape mismatches", pairs, score_bad,
              lcs_bad, shape_bad)};
}

Pattern words(const std::string& text) { return *tokenize_line(text); }

Outcome worked_examples() {
  std::vector<std::string> failed;
  std::size_t total = 0;
  auto expect = [&](bool ok, const char* name) {
    ++total;
    if (!ok) failed.push_back(name);
  };
  expect(satisfies_similarity(5, 7, 5, 0.65), "LCS 5 vs 0.65*7");
  expect(!satisfies_similarity(3, 10, 3, 0.65), "LCS 3 vs 0.65*10");
  expect(lcs_length(words("A B C"), words("A C")) == 2, "LCS of A B C / A C");

  const auto r = align_pair(words("a b c").tokens, words("a c").tokens);
  expect(r.second == TokenSeq{Token::constant("a"), Token::gap(), Token::constant("c")}, "align a b c / a c");

  const Pattern p = words("ContextHandler Started ServeletContextHandler rdd null AVAILABLE Spark");
  const Pattern q = words("ContextHandler Started ServeletContextHandler static Spark");
  const auto ctx = align_pair(p.tokens, q.tokens);
  const TokenSeq want = {Token::constant("ContextHandler"), Token::constant("Started"),
                         Token::constant("ServeletContextHandler"), Token::constant("static"),
                         Token::gap(), Token::gap(), Token::constant("Spark")};
  expect(ctx.second == want, "ContextHandler alignment");
  const std::vector<Pattern> block = {p, q};
  const auto red = reduce_matrix(align_block(block), 0.7);
  expect(red.reduced == words("ContextHandler Started ServeletContextHandler * Spark") && red.misfits.empty(),
         "ContextHandler reduction");

  AlignmentMatrix m;
  for (int i = 0; i < 10; ++i) m.rows.push_back({Token::constant(i < 9 ? "INFO" : "WARN"), Token::constant("x")});
  m.width = 2;
  for (std::size_t j = 0; j < 2; ++j) m.column_modes.push_back(column_mode(m.rows, j));
  const auto info = reduce_matrix(m, 0.7);
  expect(info.misfits == std::vector<std::size_t>{9} && info.constant_columns[0], "INFO x9 / WARN x1");

  PatternSet ps;
  ps.training_files = 1;
  ps.entries.push_back({words("k0 k1 k2 k3 k4 k5 k6 k7 k8 k9"), {1, 1, 10, {0}}});
  Config cfg;
  const auto model = select_patterns(ps, cfg);
  expect(match_line(model, "k0 k1 k2 k3 k4 XX k6 k7 k8 k9", 0.65).has_value(), "1 of 10 tokens differ");

  std::vector<std::string> lines(300, "unmatched event type");
  lines.push_back("lonely event");
  const auto rep = filter_lines(model, nullptr, lines, cfg);
  expect(rep.totals.frequency_suppressed == 300 && rep.anomalies.size() == 1 &&
             rep.anomalies[0].line_number == 301,
         "gamma 250 vs 300 occurrences");

  std::string names;
  for (const auto& f : failed) names += " [" + f + "]";
  return {failed.empty(), fmt("%zu of %zu examples exact", total - failed.size(), total) + names};
}

Outcome filtering_soundness() {
  std::size_t violations = 0, lines_checked = 0, monotone_bad = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DatasetSpec spec;
    spec.template_count = 300;
    spec.files_per_split = 3;
    spec.lines_per_file = 4000;
    spec.seed = seed;
    const Dataset ds = generate_dataset(spec, workers());
    std::vector<PatternCounts> per_file;
    for (const auto& f : ds.train) per_file.push_back(preprocess_lines(f.lines));
    Config cfg;
    cfg.seed = seed;
    const auto model = select_patterns(parse(per_file, cfg, workers()).patterns, cfg);
    const auto& lines = ds.test[0].lines;

    std::vector<std::set<std::uint64_t>> sets;
    for (std::uint64_t g : {1, 2, 5, 20, 250}) {
      Config c = cfg;
      c.gamma = g;
      const auto rep = filter_lines(model, nullptr, lines, c, workers());
      std::set<std::uint64_t> s;
      for (const auto& a : rep.anomalies) s.insert(a.line_number);
      sets.push_back(std::move(s));
      if (g != 250) continue;
      // Exhaustive LCS scan: no brute-force match may be emitted.
      for (const auto& a : rep.anomalies) {
        ++lines_checked;
        const auto pq = tokenize_line(a.line);
        for (const auto& mp : model.patterns())
          if (satisfies_similarity(mp.pattern, *pq, cfg.alpha)) {
            ++violations;
            break;
          }
      }
    }
    for (std::size_t i = 1; i < sets.size(); ++i)
      if (!std::includes(sets[i].begin(), sets[i].end(), sets[i - 1].begin(), sets[i - 1].end()))
        ++monotone_bad;
  }
  return {violations == 0 && monotone_bad == 0,
          fmt("10 corpora, %zu anomalies checked against every pattern, %zu matchable; %zu gamma "
              "monotonicity breaks",
              lines_checked, violations, monotone_bad)};
}

// M1 from train files 0-2, M3 from all, M2 = M1 plus a store learned file by
// file from files 3-7. Shared by criteria 8 and 9.
struct PrivacyRun {
  bool done = false;
  Dataset ds;
  std::vector<PatternCounts> train_counts;
  Config cfg;
  BloomConfig bloom;
  std::optional<PatternModel> m1, m3;
  EncodingStore store{BloomConfig{}, StoreOptions{}, {}};
  std::vector<std::size_t> m3_trace;
  bool m3_converged = false;
  // Per learning step: learned patterns still unrecognised, and M3 test
  // anomalies the store absorbed.
  std::vector<std::size_t> relearn_missed, relearn_learned, absorbed;
  std::set<Pattern> truth;  // M3 anomalous test patterns
  double seconds = 0;
};

std::set<Pattern> anomalous_patterns(const PatternModel& m, const EncodingStore* s, const Dataset& ds,
                                     const Config& cfg) {
  std::set<Pattern> out;
  for (const auto& f : ds.test)
    for (const auto& a : filter_lines(m, s, f.lines, cfg, workers()).anomalies) out.insert(*tokenize_line(a.line));
  return out;
}

PrivacyRun& privacy_run() {
  static PrivacyRun run;
  if (run.done) return run;
  const auto t0 = Clock::now();
  DatasetSpec spec;
  run.ds = generate_dataset(spec, workers());
  run.cfg.coverage_fraction = 1.0;
  for (const auto& f : run.ds.train) run.train_counts.push_back(preprocess_lines(f.lines));

  auto train = [&](std::size_t files, ParseResult* keep) {
    std::span<const PatternCounts> s(run.train_counts.data(), files);
    auto r = parse(s, run.cfg, workers());
    auto m = select_patterns(r.patterns, run.cfg);
    if (keep) *keep = std::move(r);
    return m;
  };
  run.m1 = train(3, nullptr);
  ParseResult full;
  run.m3 = train(run.train_counts.size(), &full);
  run.m3_trace = full.trace;
  run.m3_converged = full.converged;
  run.truth = anomalous_patterns(*run.m3, nullptr, run.ds, run.cfg);

  std::vector<Submission> subs;
  run.store = EncodingStore(run.bloom, StoreOptions{}, {});
  for (std::size_t f = 3; f < run.train_counts.size(); ++f) {
    std::vector<Pattern> learned;
    for (const auto& [p, n] : run.train_counts[f].entries) {
      if (match_pattern(*run.m1, p, run.cfg.alpha) || match_encoded(run.store, p)) continue;
      subs.push_back({encode_pattern(p, run.bloom, n), "client" + std::to_string(f)});
      learned.push_back(p);
    }
    run.store = aggregate(subs, run.bloom, 1.0);
    std::size_t missed = 0;
    for (const auto& p : learned) missed += !match_encoded(run.store, p);
    std::size_t absorbed = 0;
    for (const auto& p : run.truth) absorbed += match_encoded(run.store, p);
    run.relearn_missed.push_back(missed);
    run.relearn_learned.push_back(learned.size());
    run.absorbed.push_back(absorbed);
  }
  run.seconds = seconds_since(t0);
  run.done = true;
  return run;
}

Outcome relearn_closure() {
  const auto& run = privacy_run();
  std::size_t missed = 0, learned = 0;
  double worst_fnr = 0, mean_fnr = 0;
  for (std::size_t i = 0; i < run.relearn_missed.size(); ++i) {
    missed += run.relearn_missed[i];
    learned += run.relearn_learned[i];
    const double fnr = run.truth.empty() ? 0.0
                                         : static_cast<double>(run.absorbed[i]) /
                                               static_cast<double>(run.truth.size());
    worst_fnr = std::max(worst_fnr, fnr);
    mean_fnr += fnr / static_cast<double>(run.relearn_missed.size());
  }
  return {missed == 0 && worst_fnr <= 0.005,
          fmt("%zu of %zu learned patterns still anomalous; true anomalies absorbed: mean %.3f%%, "
              "worst %.3f%% of %zu",
              missed, learned, 100 * mean_fnr, 100 * worst_fnr, run.truth.size())};
}

Outcome privacy_end_to_end() {
  auto& run = privacy_run();
  const auto t = Clock::now();
  const auto a1 = anomalous_patterns(*run.m1, nullptr, run.ds, run.cfg);
  const auto a2 = anomalous_patterns(*run.m1, &run.store, run.ds, run.cfg);
  const double total_s = run.seconds + seconds_since(t);
  auto fdr = [&](const std::set<Pattern>& a) {
    std::size_t fp = 0;
    for (const auto& p : a) fp += !run.truth.count(p);
    return a.empty() ? 0.0 : static_cast<double>(fp) / static_cast<double>(a.size());
  };
  std::size_t fn = 0;
  for (const auto& p : run.truth) fn += !a2.count(p);
  const double fdr1 = fdr(a1), fdr2 = fdr(a2);
  const double fnr2 = run.truth.empty() ? 0.0 : static_cast<double>(fn) / static_cast<double>(run.truth.size());
  return {fdr2 <= 0.5 * fdr1 && fnr2 <= 0.05,
          fmt("anomalous patterns M1 %zu, M2 %zu, M3 %zu; FDR M1 %.3f, M2 %.3f; FNR M2 %.4f; "
              "store %zu; %.1fs on %u workers",
              a1.size(), a2.size(), run.truth.size(), fdr1, fdr2, fnr2, run.store.size(), total_s,
              workers())};
}

Outcome bitmap_fidelity() {
  std::mt19937_64 rng(99);
  BloomConfig c;
  auto word = [&] {
    std::string w;
    for (std::size_t i = 0, n = 3 + rng() % 8; i < n; ++i) w.push_back(static_cast<char>('a' + rng() % 26));
    return Token::constant(w);
  };
  double total = 0, max_fill = 0;
  for (int i = 0; i < 1000; ++i) {
    Pattern p;
    for (std::size_t k = 0, n = 2 + rng() % 40; k < n; ++k) p.tokens.push_back(word());
    // Keep a random subsequence of p and splice in fresh tokens.
    Pattern q;
    for (const auto& t : p.tokens) {
      if (rng() % 4 != 0) q.tokens.push_back(t);
      if (rng() % 5 == 0) q.tokens.push_back(word());
    }
    if (q.tokens.empty()) q.tokens.push_back(word());
    const auto ep = encode_pattern(p, c), eq = encode_pattern(q, c);
    max_fill = std::max({max_fill, ep.fill_ratio(), eq.fill_ratio()});
    total += std::abs(encoding_jaccard(ep, eq) - exact_jaccard(shingle(p, 2), shingle(q, 2)));
  }
  return {total / 1000 <= 0.08 && max_fill <= 0.25,
          fmt("mean |bitmap - shingle Jaccard| = %.4f over 1000 pairs, max fill %.3f", total / 1000, max_fill)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "logsieve_acceptance_det";
  fs::remove_all(dir);
  auto call = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "logsieve");
    std::istringstream in;
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    if (code != 0) throw std::runtime_error("logsieve " + args[1] + " failed: " + err.str());
    return out.str();
  };
  const std::string d = dir.string();
  call({"gen-data", "--out", d + "/data", "--templates", "400", "--files", "3", "--lines", "5000", "--seed", "11"});
  std::vector<std::string> models, reports;
  for (const char* w : {"1", "1", "4"}) {
    const std::string m = d + "/model_" + std::to_string(models.size()) + ".json";
    call({"train", "--in", d + "/data/train", "--out", m, "--seed", "5", "--workers", w});
    models.push_back(slurp(m));
    reports.push_back(call({"filter", "--model", m, "--in", d + "/data/test", "--workers", w}));
  }
  fs::remove_all(dir);
  const bool same = std::adjacent_find(models.begin(), models.end(), std::not_equal_to<>()) == models.end() &&
                    std::adjacent_find(reports.begin(), reports.end(), std::not_equal_to<>()) == reports.end();
  return {same, fmt("3 runs (1, 1 and 4 workers): models %s, filter reports %s",
                    models[0] == models[1] && models[1] == models[2] ? "identical" : "differ",
                    reports[0] == reports[1] && reports[1] == reports[2] ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"template recovery", template_recovery},
      {"preprocessing compression", preprocessing_compression},
      {"iterative reduction", iterative_reduction},
      {"minhash fidelity", minhash_fidelity},
      {"alignment optimality", alignment_optimality},
      {"worked examples", worked_examples},
      {"filtering soundness", filtering_soundness},
      {"privacy relearn closure", relearn_closure},
      {"privacy end-to-end", privacy_end_to_end},
      {"bitmap fidelity", bitmap_fidelity},
      {"determinism", determinism},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto t = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": " << o.detail
              << fmt(" (%.1fs)", seconds_since(t)) << std::endl;
  }
  if (only.empty() || only.count(9)) {
    const auto& run = privacy_run();
    std::string trace;
    for (auto n : run.m3_trace) trace += " " + std::to_string(n);
    std::cout << "info  full-training parse (M3): " << (run.m3_converged ? "converged" : "no fixed point")
              << ", trace" << trace << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
